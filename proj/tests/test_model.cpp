// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tagdet/errors.hpp"
#include "tagdet/model/detector.hpp"
#include "tagdet/model/init.hpp"
#include "tagdet/model/pyramid.hpp"
#include "tagdet/model/tag_layer.hpp"
#include "tagdet/model/trident_head.hpp"

using namespace tagdet;
using namespace tagdet::model;
using ad::Graph;
using ad::Tensor;
using ad::Var;
using testing::Gen;

namespace {

TagConfig small_config(std::size_t dim, FusionMode mode = FusionMode::Gating) {
    TagConfig c;
    c.dim = dim;
    c.fusion = mode;
    return c;
}

Tensor forward_tag(TagLayer& layer, const Tensor& x) {
    Graph g(false);
    return layer.forward(g, g.constant(x)).value();
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("round_to_odd and default windows") {
    CHECK(round_to_odd(9.0) == 9);
    CHECK(round_to_odd(8.0) == 9);
    CHECK(round_to_odd(7.4) == 7);
    const TagConfig c;
    CHECK(c.large_window() == 9);
    CHECK(c.context_radius() == 4);
    TagConfig bad;
    bad.window = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("fusion mode names round-trip") {
    for (FusionMode m : {FusionMode::Gating, FusionMode::Average, FusionMode::Maximum, FusionMode::Baseline})
        CHECK(parse_fusion_mode(to_string(m)) == m);
    CHECK_THROWS(parse_fusion_mode("median"));
}

TEST_CASE("instant branch hand values") {
    TagConfig c = small_config(1);
    TagLayer layer("t.", c, ParamInit(1));
    layer.params().instant_fc_weight.value.fill(0.5);
    layer.params().instant_fc_bias.value.fill(0.0);
    Graph g(false);
    // mean 3, times 0.5, ReLU.
    CHECK(layer.instant_branch(g, g.constant(Tensor({2, 1}, std::vector<double>{2, 4}))).value().item() == 1.5);
    layer.params().instant_fc_weight.value.fill(-1.0);
    CHECK(layer.instant_branch(g, g.constant(Tensor({2, 1}, std::vector<double>{2, 4}))).value().item() == 0.0);
}

TEST_CASE("instant branch of a constant sequence with identity FC is that row") {
    TagLayer layer("t.", small_config(3), ParamInit(2));
    layer.params().instant_fc_weight.value = Tensor({3, 3}, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
    layer.params().instant_fc_bias.value.fill(0.0);
    Tensor x({5, 3});
    for (std::size_t t = 0; t < 5; ++t) {
        x.at(t, 0) = 0.5;
        x.at(t, 1) = 2.0;
        x.at(t, 2) = 0.0;
    }
    Graph g(false);
    const Tensor xi = layer.instant_branch(g, g.constant(x)).value();
    CHECK(xi[0] == 0.5);
    CHECK(xi[1] == 2.0);
    CHECK(xi[2] == 0.0);
}

TEST_CASE("gate hand values") {
    TagConfig c = small_config(1);
    c.gate_hidden = 1;
    TagLayer layer("t.", c, ParamInit(3));
    auto& p = layer.params();
    // Both convolutions output exactly 1: zero kernels, unit biases.
    p.conv_w_weight.value.fill(0.0);
    p.conv_w_bias.value.fill(1.0);
    p.conv_kw_weight.value.fill(0.0);
    p.conv_kw_bias.value.fill(1.0);
    // Hidden unit sums both inputs, output passes it through.
    p.gate_hidden_weight.value.fill(1.0);
    p.gate_hidden_bias.value.fill(0.0);
    p.gate_out_weight.value.fill(1.0);
    p.gate_out_bias.value.fill(0.0);
    Graph g(false);
    const Tensor x({1, 1}, 0.3);
    CHECK(layer.gate(g, g.constant(x)).value().item() == doctest::Approx(0.880797).epsilon(1e-6));

    // Zero final affine gives 0.5 everywhere; a large bias saturates towards 1.
    p.gate_out_weight.value.fill(0.0);
    CHECK(layer.gate(g, g.constant(x)).value().item() == 0.5);
    double prev = 0.5;
    for (double bias : {1.0, 5.0, 20.0}) {
        p.gate_out_bias.value.fill(bias);
        const double beta = layer.gate(g, g.constant(x)).value().item();
        CHECK(beta > prev);
        prev = beta;
    }
    CHECK(prev > 1.0 - 1e-8);
}

TEST_CASE("gating fusion hand values") {
    // The layer's fused output is checked against beta read back from its gate.
    TagConfig c = small_config(1);
    c.gate_hidden = 1;
    TagLayer layer("t.", c, ParamInit(4));
    auto& p = layer.params();
    // Center taps only: small = x, large = 6 - 3x.
    const Tensor x({3, 1}, std::vector<double>{1, 2, 3});
    p.conv_w_weight.value.fill(0.0);
    p.conv_w_weight.value[1] = 1.0;  // K=3 center tap
    p.conv_w_bias.value.fill(0.0);
    p.conv_kw_weight.value.fill(0.0);
    const std::size_t center = c.large_window() / 2;
    p.conv_kw_weight.value[center] = -3.0;
    p.conv_kw_bias.value.fill(6.0);  // 6 - 3x: [3, 0, -3]
    Graph g(false);
    const Tensor small = layer.conv_small(g, g.constant(x)).value();
    const Tensor large = layer.conv_large(g, g.constant(x)).value();
    CHECK(small[0] == 1);
    CHECK(large[1] == 0);
    const Tensor beta = layer.gate(g, g.constant(x)).value();
    const Tensor fused = layer.convolution_branch(g, g.constant(x), FusionMode::Gating).value();
    for (std::size_t t = 0; t < 3; ++t)
        CHECK(fused[t] == doctest::Approx(beta[t] * small[t] + (1 - beta[t]) * large[t]).epsilon(1e-15));

    // The per-instant rule itself on the fixed example.
    const double s[] = {1, 2, 3}, l[] = {3, 0, 3}, b[] = {1, 0, 0.25}, expect[] = {1, 0, 3};
    for (int t = 0; t < 3; ++t) CHECK(l[t] + b[t] * (s[t] - l[t]) == expect[t]);
}

TEST_CASE("gating with a zero gate head equals averaging") {
    Gen gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        TagLayer layer("t.", small_config(4), ParamInit(trial));
        layer.params().gate_out_weight.value.fill(0.0);
        layer.params().gate_out_bias.value.fill(0.0);
        const Tensor x = gen.tensor({gen.index(1, 20), 4});
        Graph g(false);
        const Tensor a = layer.convolution_branch(g, g.constant(x), FusionMode::Gating).value();
        const Tensor b = layer.convolution_branch(g, g.constant(x), FusionMode::Average).value();
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
}

TEST_CASE("identical convolutions make gating, average and maximum agree") {
    Gen gen(6);
    TagConfig c = small_config(3);
    c.window = 9;
    c.scale = 1.2;  // large window round_to_odd(10.8) = 11
    TagLayer layer("t.", c, ParamInit(7));
    auto& p = layer.params();
    // Embed the 9-tap kernel in the 11-tap one with zero outer taps.
    p.conv_kw_weight.value.fill(0.0);
    for (std::size_t i = 0; i < p.conv_w_weight.value.numel(); ++i)
        p.conv_kw_weight.value[9 + i] = p.conv_w_weight.value[i];  // offset by one tap of 3 x 3 values
    p.conv_kw_bias.value = p.conv_w_bias.value;
    const Tensor x = gen.tensor({12, 3});
    Graph g(false);
    const Tensor small = layer.conv_small(g, g.constant(x)).value();
    for (FusionMode m : {FusionMode::Gating, FusionMode::Average, FusionMode::Maximum}) {
        const Tensor y = layer.convolution_branch(g, g.constant(x), m).value();
        for (std::size_t i = 0; i < y.numel(); ++i) CHECK(std::abs(y[i] - small[i]) <= 1e-12);
    }
}

TEST_CASE("context branch hand value") {
    TagConfig c = small_config(1);
    TagLayer layer("t.", c, ParamInit(8));
    auto& p = layer.params();
    for (ad::Parameter* w : {&p.attn_q_weight, &p.attn_k_weight, &p.attn_v_weight, &p.attn_out_weight})
        w->value.fill(1.0);
    for (ad::Parameter* b : {&p.attn_q_bias, &p.attn_k_bias, &p.attn_v_bias, &p.attn_out_bias}) b->value.fill(0.0);
    const std::size_t r = c.context_radius();
    Tensor x({2 * r + 1, 1}, 0.0);
    x[0] = 2.0;
    x[r] = 1.0;
    x[2 * r] = 4.0;
    Graph g(false);
    const Tensor y = layer.context_branch(g, g.constant(x)).value();
    const double w2 = std::exp(2.0) / (std::exp(2.0) + std::exp(4.0));
    CHECK(y[r] == doctest::Approx(w2 * 2.0 + (1.0 - w2) * 4.0).epsilon(1e-14));
    CHECK(y[r] == doctest::Approx(3.7616).epsilon(1e-4));
}

TEST_CASE("context branch with identical boundary frames or orthogonal queries") {
    Gen gen(9);
    TagConfig c = small_config(2);
    c.scale = 1.0 + 2.0 / 3.0;  // large window 5, radius 2
    TagLayer layer("t.", c, ParamInit(9));
    auto& p = layer.params();
    Tensor x = gen.tensor({5, 2});
    for (std::size_t d = 0; d < 2; ++d) x.at(4, d) = x.at(0, d);
    Graph g(false);
    const Tensor y = layer.context_branch(g, g.constant(x)).value();
    // attn_out(attn_v(x0)) at t = 2.
    const Tensor v = ad::linear(g.constant(x), g.constant(p.attn_v_weight.value), g.constant(p.attn_v_bias.value)).value();
    const Tensor o = ad::linear(g.constant(v), g.constant(p.attn_out_weight.value), g.constant(p.attn_out_bias.value)).value();
    for (std::size_t d = 0; d < 2; ++d) CHECK(y.at(2, d) == doctest::Approx(o.at(0, d)).epsilon(1e-12));

    // Zero query projection: uniform weights, output is attn_out of the mean value.
    p.attn_q_weight.value.fill(0.0);
    p.attn_q_bias.value.fill(0.0);
    const Tensor x2 = gen.tensor({5, 2});
    const Tensor y2 = layer.context_branch(g, g.constant(x2)).value();
    const Tensor v2 = ad::linear(g.constant(x2), g.constant(p.attn_v_weight.value), g.constant(p.attn_v_bias.value)).value();
    Tensor mean({1, 2});
    for (std::size_t d = 0; d < 2; ++d) mean[d] = 0.5 * (v2.at(0, d) + v2.at(4, d));
    const Tensor o2 = ad::linear(g.constant(mean), g.constant(p.attn_out_weight.value), g.constant(p.attn_out_bias.value)).value();
    for (std::size_t d = 0; d < 2; ++d) CHECK(y2.at(2, d) == doctest::Approx(o2[d]).epsilon(1e-12));
}

TEST_CASE("context branch clamps at the sequence ends") {
    Gen gen(10);
    for (std::size_t T : {1u, 2u, 3u}) {
        TagLayer layer("t.", small_config(2), ParamInit(10));
        Graph g(false);
        const Tensor y = layer.context_branch(g, g.constant(gen.tensor({T, 2}))).value();
        CHECK(y.dim(0) == T);
        CHECK(y.all_finite());
    }
}

TEST_CASE("TAG with zero parameters is the identity") {
    Gen gen(11);
    for (FusionMode m : {FusionMode::Gating, FusionMode::Average, FusionMode::Maximum, FusionMode::Baseline})
        for (std::size_t T : {1u, 2u, 7u, 64u}) {
            TagLayer layer("t.", small_config(3, m), ParamInit(11));
            layer.params().set_zero();
            const Tensor x = gen.tensor({T, 3}, -2.0, 2.0);
            const Tensor y = forward_tag(layer, x);
            REQUIRE(y.shape() == x.shape());
            for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::abs(y[i] - x[i]) <= 1e-12);
        }
}

TEST_CASE("TAG of a zero sequence with zero biases is zero") {
    TagLayer layer("t.", small_config(4), ParamInit(12));
    const Tensor y = forward_tag(layer, Tensor({6, 4}));
    for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("TAG output composes the three branches") {
    // T=3, D=1, w=1, k=3: radius 1. Small conv = identity, large conv = 0,
    // constant gate 0.5, identity attention, instant FC 0.5.
    TagConfig c = small_config(1);
    c.window = 1;
    c.scale = 3.0;
    TagLayer layer("t.", c, ParamInit(13));
    auto& p = layer.params();
    p.set_zero();
    p.conv_w_weight.value.fill(1.0);
    for (ad::Parameter* w : {&p.attn_q_weight, &p.attn_k_weight, &p.attn_v_weight, &p.attn_out_weight})
        w->value.fill(1.0);
    p.instant_fc_weight.value.fill(0.5);
    const double x[] = {2.0, 1.0, 4.0};
    const Tensor y = forward_tag(layer, Tensor({3, 1}, std::vector<double>(x, x + 3)));

    auto attend = [](double q, double kl, double kr) {
        const double wl = 1.0 / (1.0 + std::exp(q * kr - q * kl));
        return wl * kl + (1.0 - wl) * kr;
    };
    const double context[] = {attend(2, 2, 1), attend(1, 2, 4), attend(4, 1, 4)};
    const double instant = 0.5 * (7.0 / 3.0);
    for (int t = 0; t < 3; ++t) CHECK(y[t] == doctest::Approx(x[t] + 0.5 * x[t] + context[t] + instant).epsilon(1e-14));
    CHECK(context[1] == doctest::Approx(3.7616).epsilon(1e-4));
}

TEST_CASE("disabling gating forces baseline fusion and disabling context drops the branch") {
    Gen gen(14);
    const Tensor x = gen.tensor({9, 3});
    TagConfig c = small_config(3);
    c.use_gating = false;
    TagLayer a("t.", c, ParamInit(14));
    c.use_gating = true;
    c.fusion = FusionMode::Baseline;
    TagLayer b("t.", c, ParamInit(14));
    const Tensor ya = forward_tag(a, x), yb = forward_tag(b, x);
    for (std::size_t i = 0; i < ya.numel(); ++i) CHECK(ya[i] == yb[i]);

    c.use_context = false;
    TagLayer off("t.", c, ParamInit(14));
    TagLayer on("t.", small_config(3, FusionMode::Baseline), ParamInit(14));
    on.params().attn_out_weight.value.fill(0.0);
    on.params().attn_out_bias.value.fill(0.0);
    const Tensor y_off = forward_tag(off, x), y_on = forward_tag(on, x);
    for (std::size_t i = 0; i < y_on.numel(); ++i) CHECK(std::abs(y_on[i] - y_off[i]) <= 1e-15);
}

TEST_CASE("TAG gradients for every parameter group") {
    for (FusionMode m : {FusionMode::Gating, FusionMode::Average, FusionMode::Maximum, FusionMode::Baseline})
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Gen gen(seed);
            TagConfig c = small_config(2, m);
            c.scale = 1.0 + 2.0 / 3.0;  // 5-tap large window keeps the check small
            TagLayer layer("t.", c, ParamInit(seed));
            for (ad::Parameter* p : layer.parameters())
                for (double& v : p->value.values()) v = gen.uniform(-0.8, 0.8);
            const Tensor x = gen.tensor({6, 2});
            const auto r = testing::check_param_gradients(
                [&](Graph& g) { return layer.forward(g, g.constant(x)); }, layer.parameters(), seed);
            CAPTURE(to_string(m));
            CAPTURE(seed);
            CHECK(r.max_rel_error <= 1e-4);
            const auto rx = testing::check_gradients(
                [&](Graph& g, const std::vector<Var>& v) { return layer.forward(g, v[0]); }, {x}, seed);
            CHECK(rx.max_rel_error <= 1e-4);
        }
}

TEST_CASE("gating stays within the two convolution outputs") {
    Gen gen(15);
    for (int trial = 0; trial < 100; ++trial) {
        TagLayer layer("t.", small_config(3), ParamInit(100 + trial));
        for (ad::Parameter* p : layer.parameters())
            for (double& v : p->value.values()) v = gen.uniform(-2.0, 2.0);
        const Tensor x = gen.tensor({gen.index(1, 16), 3}, -3.0, 3.0);
        Graph g(false);
        const Tensor s = layer.conv_small(g, g.constant(x)).value();
        const Tensor l = layer.conv_large(g, g.constant(x)).value();
        const Tensor y = layer.convolution_branch(g, g.constant(x), FusionMode::Gating).value();
        for (std::size_t i = 0; i < y.numel(); ++i) {
            CHECK(y[i] >= std::min(s[i], l[i]) - 1e-12);
            CHECK(y[i] <= std::max(s[i], l[i]) + 1e-12);
        }
    }
}

TEST_CASE("pyramid lengths halve with ceiling") {
    CHECK(pyramid_lengths(64, 5) == std::vector<std::size_t>{64, 32, 16, 8, 4});
    CHECK(pyramid_lengths(5, 3) == std::vector<std::size_t>{5, 3, 2});
    CHECK(pyramid_lengths(1, 4) == std::vector<std::size_t>{1, 1, 1, 1});
    for (std::size_t T = 1; T < 200; ++T) {
        const auto lens = pyramid_lengths(T, 6);
        for (std::size_t l = 0; l + 1 < lens.size(); ++l) CHECK(lens[l + 1] == (lens[l] + 1) / 2);
    }
}

TEST_CASE("pyramid forward shapes and determinism") {
    Gen gen(16);
    PyramidConfig c;
    c.input_dim = 3;
    c.levels = 3;
    c.tag = small_config(4);
    PyramidBackbone net(c, ParamInit(16));
    for (std::size_t T : {1u, 2u, 7u, 64u}) {
        const Tensor x = gen.tensor({T, 3});
        Graph g1(false), g2(false);
        const auto a = net.forward(g1, g1.constant(x));
        const auto b = net.forward(g2, g2.constant(x));
        const auto lens = pyramid_lengths(T, 3);
        REQUIRE(a.levels.size() == 3);
        for (std::size_t l = 0; l < 3; ++l) {
            CHECK(a.levels[l].shape() == ad::Shape{lens[l], 4});
            CHECK(a.strides[l] == (std::size_t{1} << l));
            const Tensor& va = a.levels[l].value();
            const Tensor& vb = b.levels[l].value();
            for (std::size_t i = 0; i < va.numel(); ++i) CHECK(va[i] == vb[i]);
        }
        Graph g(false);
        CHECK(net.embed(g, g.constant(x)).shape() == ad::Shape{T, 4});
    }
}

namespace {

// Row-wise layer norm with unit gain and zero bias.
Tensor normalize_rows(const Tensor& x) {
    Tensor y = x;
    const std::size_t T = x.dim(0), D = x.dim(1);
    for (std::size_t t = 0; t < T; ++t) {
        double mean = 0.0, var = 0.0;
        for (std::size_t d = 0; d < D; ++d) mean += x.at(t, d);
        mean /= static_cast<double>(D);
        for (std::size_t d = 0; d < D; ++d) var += (x.at(t, d) - mean) * (x.at(t, d) - mean);
        var /= static_cast<double>(D);
        for (std::size_t d = 0; d < D; ++d) y.at(t, d) = (x.at(t, d) - mean) / std::sqrt(var + 1e-5);
    }
    return y;
}

void make_identity_embed(PyramidBackbone& net) {
    const std::size_t K = net.config().embed_kernel, D = net.config().tag.dim;
    net.embed_weight.value.fill(0.0);
    for (std::size_t d = 0; d < D; ++d) net.embed_weight.value[((K / 2) * D + d) * D + d] = 1.0;
    net.embed_bias.value.fill(0.0);
}

}  // namespace

TEST_CASE("identity embedding of nonnegative input is its row normalization") {
    Gen gen(17);
    PyramidConfig c;
    c.input_dim = 4;
    c.levels = 1;
    c.tag = small_config(4);
    PyramidBackbone net(c, ParamInit(17));
    make_identity_embed(net);
    const Tensor x = gen.tensor({9, 4}, 0.0, 2.0);
    Graph g(false);
    const Tensor y = net.embed(g, g.constant(x)).value();
    const Tensor expect = normalize_rows(x);
    for (std::size_t i = 0; i < y.numel(); ++i) CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    // Already-normalized nonnegative input is a fixed point up to the epsilon.
    const Tensor z = net.embed(g, g.constant(Tensor({2, 4}, std::vector<double>{0, 0, 2, 2, 2, 2, 0, 0}))).value();
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(z[i] - normalize_rows(Tensor({2, 4}, std::vector<double>{0, 0, 2, 2, 2, 2, 0, 0}))[i]) <= 1e-12);
}

TEST_CASE("zero TAG layers with identity embedding give the pooled cascade") {
    Gen gen(18);
    PyramidConfig c;
    c.input_dim = 3;
    c.levels = 4;
    c.tag = small_config(3);
    PyramidBackbone net(c, ParamInit(18));
    make_identity_embed(net);
    for (TagLayer& layer : net.layers()) layer.params().set_zero();
    const Tensor x = gen.tensor({13, 3}, 0.0, 1.0);
    Graph g(false);
    const auto out = net.forward(g, g.constant(x));

    Tensor level = normalize_rows(x);
    for (std::size_t l = 0; l < 4; ++l) {
        if (l > 0) {
            const std::size_t T = level.dim(0), n = (T + 1) / 2;
            Tensor pooled({n, 3});
            for (std::size_t t = 0; t < n; ++t)
                for (std::size_t d = 0; d < 3; ++d)
                    pooled.at(t, d) = 2 * t + 1 < T ? std::max(level.at(2 * t, d), level.at(2 * t + 1, d))
                                                    : level.at(2 * t, d);
            level = pooled;
        }
        const Tensor& got = out.levels[l].value();
        REQUIRE(got.shape() == level.shape());
        for (std::size_t i = 0; i < got.numel(); ++i) CHECK(std::abs(got[i] - level[i]) <= 1e-12);
    }
}

TEST_CASE("pyramid gradient from a level to the input") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen gen(seed);
        PyramidConfig c;
        c.input_dim = 2;
        c.levels = 3;
        c.tag = small_config(2);
        c.tag.scale = 1.0 + 2.0 / 3.0;
        PyramidBackbone net(c, ParamInit(seed));
        const Tensor x = gen.tensor({6, 2});
        for (std::size_t level = 0; level < 3; ++level) {
            const auto r = testing::check_gradients(
                [&](Graph& g, const std::vector<Var>& v) { return net.forward(g, v[0]).levels[level]; }, {x}, seed);
            CHECK(r.max_rel_error <= 1e-4);
        }
        const auto rp = testing::check_param_gradients(
            [&](Graph& g) { return net.forward(g, g.constant(x)).levels[2]; },
            {&net.embed_weight, &net.embed_bias, &net.embed_norm_gain, &net.embed_norm_bias}, seed);
        CHECK(rp.max_rel_error <= 1e-4);
    }
}

TEST_CASE("head output shapes and prior") {
    Gen gen(19);
    HeadConfig hc;
    hc.num_classes = 3;
    hc.bins = 5;
    TridentHead head(4, hc, ParamInit(19));
    for (std::size_t T : {1u, 4u, 9u}) {
        Graph g(false);
        const HeadOutput o = head.forward(g, g.constant(gen.tensor({T, 4})));
        CHECK(o.cls.shape() == ad::Shape{T, 3});
        CHECK(o.start.shape() == ad::Shape{T, 5});
        CHECK(o.end.shape() == ad::Shape{T, 5});
        CHECK(o.center.shape() == ad::Shape{T, 10});
    }
    CHECK(head.cls_out.bias.value[0] == doctest::Approx(-std::log(99.0)).epsilon(1e-15));
}

TEST_CASE("zeroed head gives probability one half and uniform bins") {
    Gen gen(20);
    HeadConfig hc;
    hc.bins = 16;
    TridentHead head(4, hc, ParamInit(20));
    head.zero_output_layers();
    Graph g(false);
    const HeadOutput o = head.forward(g, g.constant(gen.tensor({7, 4})));
    for (double v : o.cls.value().values()) CHECK(sigmoid(v) == 0.5);
    for (double d : estimate_boundaries(o).value().values()) CHECK(d == 7.5);
}

TEST_CASE("boundary expectation hand values and shift invariance") {
    Graph g(false);
    const std::size_t B = 3, T = 1;
    Tensor center({T, 2 * B});
    center[0] = std::log(1.0);
    center[1] = std::log(2.0);
    center[2] = std::log(4.0);
    HeadOutput o{g.constant(Tensor({T, 1})), g.constant(Tensor({T, B})), g.constant(Tensor({T, B})),
                 g.constant(center)};
    const Tensor d = estimate_boundaries(o).value();
    CHECK(d[0] == doctest::Approx(10.0 / 7.0).epsilon(1e-14));
    CHECK(d[1] == 1.0);  // uniform end side

    Tensor shifted = center;
    for (std::size_t b = 0; b < B; ++b) shifted[b] += 17.0;
    o.center = g.constant(shifted);
    CHECK(estimate_boundaries(o).value()[0] == doctest::Approx(10.0 / 7.0).epsilon(1e-14));

    // Mass concentrated on bin 0.
    Tensor peaked({T, 2 * B}, -1e3);
    peaked[0] = 1e3;
    o.center = g.constant(peaked);
    CHECK(estimate_boundaries(o).value()[0] == 0.0);
}

TEST_CASE("boundary expectation reads the start logits of earlier instants") {
    // At t, the start side combines start[t - b, b] with t - b clamped at 0.
    // A spike at start[1, 2] only moves the instant t = 3.
    Graph g(false);
    const std::size_t B = 3, T = 5;
    Tensor start({T, B});
    start.at(1, 2) = 50.0;
    HeadOutput o{g.constant(Tensor({T, 1})), g.constant(start), g.constant(Tensor({T, B})),
                 g.constant(Tensor({T, 2 * B}))};
    const Tensor d = estimate_boundaries(o).value();
    for (std::size_t t = 0; t < T; ++t) {
        CAPTURE(t);
        if (t == 3)
            CHECK(d.at(t, 0) == doctest::Approx(2.0).epsilon(1e-12));
        else
            CHECK(d.at(t, 0) == 1.0);
    }
}

TEST_CASE("boundaries stay in [0, B-1] and pass the gradient check") {
    Gen gen(21);
    for (int trial = 0; trial < 50; ++trial) {
        HeadConfig hc;
        hc.bins = gen.index(1, 8);
        TridentHead head(3, hc, ParamInit(trial));
        for (ad::Parameter* p : head.parameters())
            for (double& v : p->value.values()) v = gen.uniform(-3.0, 3.0);
        Graph g(false);
        const Tensor d = estimate_boundaries(head.forward(g, g.constant(gen.tensor({gen.index(1, 10), 3}, -3, 3)))).value();
        for (double v : d.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= static_cast<double>(hc.bins - 1));
        }
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen g2(seed);
        HeadConfig hc;
        hc.bins = 4;
        hc.num_classes = 2;
        TridentHead head(2, hc, ParamInit(seed));
        const Tensor x = g2.tensor({5, 2});
        const auto r = testing::check_param_gradients(
            [&](Graph& g) { return estimate_boundaries(head.forward(g, g.constant(x))); }, head.parameters(), seed);
        CHECK(r.max_rel_error <= 1e-4);
        const auto rc = testing::check_param_gradients(
            [&](Graph& g) { return head.forward(g, g.constant(x)).cls; }, head.parameters(), seed);
        CHECK(rc.max_rel_error <= 1e-4);
    }
}

TEST_CASE("the head is shared across levels") {
    Gen gen(22);
    ModelConfig mc;
    mc.pyramid.input_dim = 3;
    mc.pyramid.levels = 3;
    mc.pyramid.tag = small_config(4);
    mc.head.num_classes = 2;
    Detector det(mc, 22);
    const Tensor feat = gen.tensor({5, 4});
    Graph g(false);
    const Tensor a = det.head().forward(g, g.constant(feat)).cls.value();
    const Tensor b = det.head().forward(g, g.constant(feat)).cls.value();
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);

    const Tensor x = gen.tensor({16, 3});
    const auto before = det.predict(x);
    det.head().cls_out.bias.value.fill(0.7);
    const auto after = det.predict(x);
    for (std::size_t l = 0; l < before.size(); ++l) {
        bool changed = false;
        for (std::size_t i = 0; i < before[l].cls_prob.numel(); ++i)
            changed = changed || before[l].cls_prob[i] != after[l].cls_prob[i];
        CHECK(changed);
    }
}

TEST_CASE("decode hand values") {
    LevelPrediction lvl;
    lvl.stride = 1;
    lvl.cls_prob = Tensor({11, 2}, 0.0);
    lvl.distances = Tensor({11, 2}, 0.0);
    lvl.cls_prob.at(10, 1) = 0.9;
    lvl.cls_prob.at(10, 0) = 0.2;
    lvl.distances.at(10, 0) = 2.0;
    lvl.distances.at(10, 1) = 3.0;
    lvl.cls_prob.at(4, 0) = 0.8;  // zero distances: degenerate, dropped
    std::vector<LevelPrediction> levels{lvl};
    auto segs = decode(levels, 1.0, 0.01);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].start == 8.0);
    CHECK(segs[0].end == 13.0);
    CHECK(segs[0].label == 2);
    CHECK(segs[0].score == 0.9);

    levels[0].stride = 2;
    segs = decode(levels, 1.0, 0.01);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].start == 16.0);
    CHECK(segs[0].end == 26.0);
    segs = decode(levels, 0.5, 0.01);
    CHECK(segs[0].start == 8.0);
}

TEST_CASE("same seed gives identical parameters") {
    ModelConfig mc;
    mc.pyramid.input_dim = 4;
    mc.pyramid.tag = small_config(8);
    Detector a(mc, 5), b(mc, 5), c(mc, 6);
    CHECK(parameter_digest(a.parameters()) == parameter_digest(b.parameters()));
    CHECK(parameter_digest(a.parameters()) != parameter_digest(c.parameters()));
    // Fusion mode and branch flags do not change the initial values.
    mc.pyramid.tag.fusion = FusionMode::Maximum;
    mc.pyramid.tag.use_context = false;
    Detector d(mc, 5);
    CHECK(parameter_digest(a.parameters()) == parameter_digest(d.parameters()));
}
