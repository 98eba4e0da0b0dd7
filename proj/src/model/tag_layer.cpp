// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/model/tag_layer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tagdet/autodiff/ops.hpp"
#include "tagdet/errors.hpp"

namespace tagdet::model {

using ad::Graph;
using ad::Var;

std::string_view to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::Gating: return "gating";
        case FusionMode::Average: return "average";
        case FusionMode::Maximum: return "maximum";
        case FusionMode::Baseline: return "baseline";
    }
    throw ConfigError("unknown fusion mode");
}

FusionMode parse_fusion_mode(std::string_view name) {
    for (FusionMode m : {FusionMode::Gating, FusionMode::Average, FusionMode::Maximum, FusionMode::Baseline})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown fusion mode '" + std::string(name) + "' (expected gating|average|maximum|baseline)");
}

std::size_t round_to_odd(double v) {
    if (!(v >= 1.0)) throw ConfigError("round_to_odd: value must be >= 1");
    return static_cast<std::size_t>(2.0 * std::floor((v - 1.0) / 2.0 + 0.5) + 1.0);
}

void TagConfig::validate() const {
    if (dim == 0) throw ConfigError("tag: dim must be positive");
    if (window % 2 == 0) throw ConfigError("tag: window must be odd");
    if (baseline_window % 2 == 0) throw ConfigError("tag: baseline window must be odd");
    if (large_window() <= window)
        throw ConfigError("tag: large window " + std::to_string(large_window()) + " must exceed window " +
                          std::to_string(window));
}

void TagLayerParams::set_zero() {
    for (ad::Parameter* p : list()) p->value.fill(0.0);
}

ParameterList TagLayerParams::list() {
    return {&conv_w_weight,      &conv_w_bias,      &conv_kw_weight,    &conv_kw_bias,       &gate_hidden_weight,
            &gate_hidden_bias,   &gate_out_weight,  &gate_out_bias,     &attn_q_weight,      &attn_q_bias,
            &attn_k_weight,      &attn_k_bias,      &attn_v_weight,     &attn_v_bias,        &attn_out_weight,
            &attn_out_bias,      &instant_fc_weight, &instant_fc_bias,  &baseline_conv_weight, &baseline_conv_bias};
}

TagLayer::TagLayer(const std::string& prefix, const TagConfig& cfg, const ParamInit& init) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t D = cfg_.dim, H = cfg_.hidden();
    const std::size_t w = cfg_.window, kw = cfg_.large_window(), wb = cfg_.baseline_window;
    auto conv = [&](const std::string& n, std::size_t k) { return init.fan_in(prefix + n, {k, D, D}, k * D); };
    auto bias = [&](const std::string& n, std::size_t width) { return init.constant(prefix + n, {1, width}, 0.0); };

    params_.conv_w_weight = conv("conv_w.weight", w);
    params_.conv_w_bias = bias("conv_w.bias", D);
    params_.conv_kw_weight = conv("conv_kw.weight", kw);
    params_.conv_kw_bias = bias("conv_kw.bias", D);
    params_.gate_hidden_weight = init.fan_in(prefix + "gate.hidden.weight", {2 * D, H}, 2 * D);
    params_.gate_hidden_bias = bias("gate.hidden.bias", H);
    params_.gate_out_weight = init.fan_in(prefix + "gate.out.weight", {H, 1}, H);
    params_.gate_out_bias = bias("gate.out.bias", 1);
    params_.attn_q_weight = init.fan_in(prefix + "attn.q.weight", {D, D}, D);
    params_.attn_q_bias = bias("attn.q.bias", D);
    params_.attn_k_weight = init.fan_in(prefix + "attn.k.weight", {D, D}, D);
    params_.attn_k_bias = bias("attn.k.bias", D);
    params_.attn_v_weight = init.fan_in(prefix + "attn.v.weight", {D, D}, D);
    params_.attn_v_bias = bias("attn.v.bias", D);
    params_.attn_out_weight = init.fan_in(prefix + "attn.out.weight", {D, D}, D);
    params_.attn_out_bias = bias("attn.out.bias", D);
    params_.instant_fc_weight = init.fan_in(prefix + "instant.weight", {D, D}, D);
    params_.instant_fc_bias = bias("instant.bias", D);
    params_.baseline_conv_weight = conv("baseline_conv.weight", wb);
    params_.baseline_conv_bias = bias("baseline_conv.bias", D);
}

Var TagLayer::conv_small(Graph& g, Var x) {
    return ad::conv1d(x, g.param(params_.conv_w_weight), g.param(params_.conv_w_bias));
}

Var TagLayer::conv_large(Graph& g, Var x) {
    return ad::conv1d(x, g.param(params_.conv_kw_weight), g.param(params_.conv_kw_bias));
}

Var TagLayer::instant_branch(Graph& g, Var x) {
    Var pooled = ad::mean_time(x);
    return ad::relu(ad::linear(pooled, g.param(params_.instant_fc_weight), g.param(params_.instant_fc_bias)));
}

Var TagLayer::gate_from(Graph& g, Var small, Var large) {
    Var joint = ad::concat_cols(small, large);
    Var hidden =
        ad::relu(ad::linear(joint, g.param(params_.gate_hidden_weight), g.param(params_.gate_hidden_bias)));
    return ad::sigmoid(ad::linear(hidden, g.param(params_.gate_out_weight), g.param(params_.gate_out_bias)));
}

Var TagLayer::gate(Graph& g, Var x) { return gate_from(g, conv_small(g, x), conv_large(g, x)); }

Var TagLayer::convolution_branch(Graph& g, Var x, FusionMode mode) {
    Var small = conv_small(g, x);
    Var large = conv_large(g, x);
    switch (mode) {
        case FusionMode::Gating: {
            // beta * small + (1 - beta) * large
            Var beta = gate_from(g, small, large);
            return ad::add(large, ad::mul_col(ad::sub(small, large), beta));
        }
        case FusionMode::Average: return ad::scale(ad::add(small, large), 0.5);
        case FusionMode::Maximum: return ad::maximum(small, large);
        case FusionMode::Baseline: {
            Var weight = ad::conv1d(x, g.param(params_.baseline_conv_weight), g.param(params_.baseline_conv_bias));
            return ad::mul(weight, ad::add(small, large));
        }
    }
    throw ConfigError("convolution_branch: unknown fusion mode");
}

Var TagLayer::context_branch(Graph& g, Var x) {
    const std::size_t T = x.shape().at(0), D = x.shape().at(1);
    const std::size_t r = cfg_.context_radius();
    std::vector<std::size_t> left(T), right(T);
    for (std::size_t t = 0; t < T; ++t) {
        left[t] = t >= r ? t - r : 0;
        right[t] = std::min(t + r, T - 1);
    }
    Var q = ad::linear(x, g.param(params_.attn_q_weight), g.param(params_.attn_q_bias));
    Var k = ad::linear(x, g.param(params_.attn_k_weight), g.param(params_.attn_k_bias));
    Var v = ad::linear(x, g.param(params_.attn_v_weight), g.param(params_.attn_v_bias));

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(D));
    Var logits = ad::scale(ad::concat_cols(ad::row_dot(q, ad::gather_rows(k, left)),
                                           ad::row_dot(q, ad::gather_rows(k, right))),
                           inv_sqrt_d);
    Var attn = ad::softmax(logits, 1);
    Var mixed = ad::add(ad::mul_col(ad::gather_rows(v, left), ad::slice_cols(attn, 0, 1)),
                        ad::mul_col(ad::gather_rows(v, right), ad::slice_cols(attn, 1, 2)));
    return ad::linear(mixed, g.param(params_.attn_out_weight), g.param(params_.attn_out_bias));
}

Var TagLayer::forward(Graph& g, Var x) {
    if (x.shape().size() != 2 || x.shape()[1] != cfg_.dim)
        throw ShapeError("tag_forward: expected T x " + std::to_string(cfg_.dim) + " input, got " +
                         ad::shape_str(x.shape()));
    Var out = ad::add(x, convolution_branch(g, x, cfg_.effective_fusion()));
    if (cfg_.use_context) out = ad::add(out, context_branch(g, x));
    return ad::add_row(out, instant_branch(g, x));
}

}  // namespace tagdet::model
