// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "support.hpp"
#include "tagdet/cli/commands.hpp"
#include "tagdet/data/feature_file.hpp"
#include "tagdet/errors.hpp"
#include "tagdet/eval/map.hpp"
#include "tagdet/eval/soft_nms.hpp"
#include "tagdet/model/detector.hpp"
#include "tagdet/model/init.hpp"
#include "tagdet/model/pyramid.hpp"
#include "tagdet/model/tag_layer.hpp"
#include "tagdet/model/trident_head.hpp"
#include "tagdet/train/loss.hpp"
#include "tagdet/train/targets.hpp"

using namespace tagdet;
using ad::Graph;
using ad::Tensor;
using ad::Var;
using testing::Gen;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-4;
constexpr double kGradBudgetSeconds = 120.0;
constexpr double kIdentityTol = 1e-12;
constexpr double kFusionTol = 1e-12;
constexpr double kNmsTol = 1e-12;
constexpr double kMapTol = 1e-9;
constexpr double kEndToEndMap = 0.85;
constexpr std::size_t kEndToEndSteps = 2000;
constexpr double kEndToEndBudgetSeconds = 600.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const std::vector<model::FusionMode> kModes{model::FusionMode::Gating, model::FusionMode::Average,
                                            model::FusionMode::Maximum, model::FusionMode::Baseline};

model::TagConfig tag_config(std::size_t dim, model::FusionMode mode) {
    model::TagConfig c;
    c.dim = dim;
    c.fusion = mode;
    return c;
}

void randomize(const model::ParameterList& params, Gen& gen, double range) {
    for (ad::Parameter* p : params)
        for (double& v : p->value.values()) v = gen.uniform(-range, range);
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    std::map<std::string, double> worst;
    std::size_t checked = 0;
    auto note = [&](const std::string& op, const testing::GradCheck& r) {
        worst[op] = std::max(worst[op], r.max_rel_error);
        checked += r.checked;
    };

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen gen(seed);
        for (std::size_t K : {1u, 3u, 5u})
            for (std::size_t stride : {1u, 2u})
                note("conv1d",
                     testing::check_gradients(
                         [stride](Graph&, const std::vector<Var>& v) { return ad::conv1d(v[0], v[1], v[2], stride); },
                         {gen.tensor({7, 2}), gen.tensor({K, 2, 3}), gen.tensor({1, 3})}, seed));

        model::TagConfig c = tag_config(2, model::FusionMode::Gating);
        c.scale = 1.0 + 2.0 / 3.0;  // 5-tap large window keeps the check small
        model::TagLayer layer("t.", c, model::ParamInit(seed));
        randomize(layer.parameters(), gen, 0.8);
        const Tensor x = gen.tensor({6, 2});
        using Branch = std::function<Var(Graph&, Var)>;
        const std::vector<std::pair<std::string, Branch>> branches{
            {"gate", [&](Graph& g, Var v) { return layer.gate(g, v); }},
            {"context", [&](Graph& g, Var v) { return layer.context_branch(g, v); }},
            {"instant", [&](Graph& g, Var v) { return layer.instant_branch(g, v); }},
        };
        for (const auto& [name, fn] : branches) {
            note(name, testing::check_param_gradients([&](Graph& g) { return fn(g, g.constant(x)); },
                                                      layer.parameters(), seed));
            note(name, testing::check_gradients([&](Graph& g, const std::vector<Var>& v) { return fn(g, v[0]); },
                                                {x}, seed));
        }
        for (model::FusionMode m : kModes) {
            model::TagConfig cm = c;
            cm.fusion = m;
            model::TagLayer full("t.", cm, model::ParamInit(seed));
            randomize(full.parameters(), gen, 0.8);
            note("tag", testing::check_param_gradients([&](Graph& g) { return full.forward(g, g.constant(x)); },
                                                       full.parameters(), seed));
        }

        model::PyramidConfig pc;
        pc.input_dim = 2;
        pc.levels = 3;
        pc.tag = c;
        model::PyramidBackbone net(pc, model::ParamInit(seed));
        note("pyramid", testing::check_gradients(
                            [&](Graph& g, const std::vector<Var>& v) { return net.forward(g, v[0]).levels[2]; }, {x},
                            seed));
        note("pyramid", testing::check_param_gradients(
                            [&](Graph& g) { return net.forward(g, g.constant(x)).levels[1]; }, net.parameters(), seed));

        model::HeadConfig hc;
        hc.bins = 4;
        hc.num_classes = 2;
        model::TridentHead head(2, hc, model::ParamInit(seed));
        randomize(head.parameters(), gen, 1.0);
        note("head", testing::check_param_gradients(
                         [&](Graph& g) { return model::estimate_boundaries(head.forward(g, g.constant(x))); },
                         head.parameters(), seed));
        note("head", testing::check_param_gradients([&](Graph& g) { return head.forward(g, g.constant(x)).cls; },
                                                    head.parameters(), seed));

        Tensor targets({4, 3});
        for (double& v : targets.values()) v = gen.coin() ? 1.0 : 0.0;
        const std::vector<double> w{0.5, 1.0, 0.0, 2.0};
        note("focal", testing::check_gradients(
                          [&](Graph&, const std::vector<Var>& v) {
                              return ad::sigmoid_focal_loss(v[0], targets, w, 0.25, 2.0);
                          },
                          {gen.tensor({4, 3}, -3.0, 3.0)}, seed));
        const Tensor box = gen.tensor({4, 2}, 0.5, 6.0);
        for (ad::IouVariant variant : {ad::IouVariant::Plain, ad::IouVariant::Generalized})
            note("iou", testing::check_gradients(
                            [&](Graph&, const std::vector<Var>& v) { return ad::iou_loss(v[0], box, w, variant); },
                            {gen.tensor({4, 2}, 0.5, 6.0)}, seed));
    }

    Outcome o;
    double max_err = 0.0;
    for (const auto& [op, e] : worst) {
        max_err = std::max(max_err, e);
        if (e > kGradTol) {
            o.pass = false;
            o.detail += op + " " + fmt("%.2e", e) + "; ";
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= kGradBudgetSeconds) o.pass = false;
    o.detail += std::to_string(worst.size()) + " ops x 5 seeds, " + std::to_string(checked) + " entries, max rel err " +
                fmt("%.2e", max_err) + ", " + fmt("%.1f", elapsed) + " s";
    return o;
}

Outcome residual_identity() {
    Gen gen(101);
    double worst = 0.0;
    for (model::FusionMode m : kModes)
        for (std::size_t T : {1u, 2u, 7u, 64u}) {
            model::TagLayer layer("t.", tag_config(4, m), model::ParamInit(T));
            layer.params().set_zero();
            const Tensor x = gen.tensor({T, 4}, -3.0, 3.0);
            Graph g(false);
            const Tensor y = layer.forward(g, g.constant(x)).value();
            for (std::size_t i = 0; i < x.numel(); ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
        }
    return {worst <= kIdentityTol, "max |TAG(x) - x| " + fmt("%.1e", worst) + " over 4 modes x T in {1,2,7,64}"};
}

Outcome fusion_equivalence() {
    Gen gen(102);
    double zero_gate = 0.0, same_conv = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        model::TagLayer layer("t.", tag_config(4, model::FusionMode::Gating), model::ParamInit(trial));
        randomize(layer.parameters(), gen, 1.0);
        layer.params().gate_out_weight.value.fill(0.0);
        layer.params().gate_out_bias.value.fill(0.0);
        const Tensor x = gen.tensor({gen.index(1, 24), 4});
        Graph g(false);
        const Tensor a = layer.convolution_branch(g, g.constant(x), model::FusionMode::Gating).value();
        const Tensor b = layer.convolution_branch(g, g.constant(x), model::FusionMode::Average).value();
        for (std::size_t i = 0; i < a.numel(); ++i) zero_gate = std::max(zero_gate, std::abs(a[i] - b[i]));

        // Large kernel = small kernel padded with zero taps on both sides.
        model::TagConfig c = tag_config(3, model::FusionMode::Gating);
        model::TagLayer eq("t.", c, model::ParamInit(trial));
        randomize(eq.parameters(), gen, 1.0);
        auto& p = eq.params();
        const std::size_t ks = p.conv_w_weight.value.dim(0), kl = p.conv_kw_weight.value.dim(0);
        const std::size_t tap = p.conv_w_weight.value.numel() / ks, pad = (kl - ks) / 2;
        p.conv_kw_weight.value.fill(0.0);
        for (std::size_t i = 0; i < p.conv_w_weight.value.numel(); ++i)
            p.conv_kw_weight.value[pad * tap + i] = p.conv_w_weight.value[i];
        p.conv_kw_bias.value = p.conv_w_bias.value;
        const Tensor xs = gen.tensor({gen.index(1, 24), 3});
        Graph h(false);
        const Tensor ref = eq.convolution_branch(h, h.constant(xs), model::FusionMode::Gating).value();
        for (model::FusionMode m : {model::FusionMode::Average, model::FusionMode::Maximum}) {
            const Tensor y = eq.convolution_branch(h, h.constant(xs), m).value();
            for (std::size_t i = 0; i < y.numel(); ++i) same_conv = std::max(same_conv, std::abs(y[i] - ref[i]));
        }
    }
    return {zero_gate <= kFusionTol && same_conv <= kFusionTol,
            "zero gate vs average " + fmt("%.1e", zero_gate) + ", shared kernels across modes " + fmt("%.1e", same_conv) +
                " (100 trials)"};
}

Outcome convexity() {
    Gen gen(103);
    std::size_t violations = 0, points = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        model::TagLayer layer("t.", tag_config(3, model::FusionMode::Gating), model::ParamInit(1000 + trial));
        randomize(layer.parameters(), gen, 2.0);
        const Tensor x = gen.tensor({gen.index(1, 16), 3}, -3.0, 3.0);
        Graph g(false);
        const Tensor s = layer.conv_small(g, g.constant(x)).value();
        const Tensor l = layer.conv_large(g, g.constant(x)).value();
        const Tensor y = layer.convolution_branch(g, g.constant(x), model::FusionMode::Gating).value();
        for (std::size_t i = 0; i < y.numel(); ++i, ++points)
            if (y[i] < std::min(s[i], l[i]) - 1e-12 || y[i] > std::max(s[i], l[i]) + 1e-12) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(points) + " points, 1000 trials"};
}

std::vector<ScoredSegment> random_segments(Gen& gen, std::size_t max_n, int classes) {
    std::vector<ScoredSegment> out(gen.index(0, max_n));
    for (auto& s : out) {
        s.start = static_cast<double>(gen.index(0, 20));
        s.end = s.start + static_cast<double>(gen.index(1, 10));
        s.label = static_cast<int>(gen.index(1, static_cast<std::size_t>(classes)));
        s.score = gen.coin() ? static_cast<double>(gen.index(1, 10)) / 10.0 : gen.uniform(0.001, 1.0);
    }
    return out;
}

Outcome soft_nms_oracle() {
    Gen gen(104);
    double worst = 0.0;
    std::size_t mismatched = 0;
    for (eval::NmsMethod method : {eval::NmsMethod::Linear, eval::NmsMethod::Gaussian})
        for (int trial = 0; trial < 1000; ++trial) {
            const auto segs = random_segments(gen, 12, 3);
            eval::SoftNmsConfig cfg;
            cfg.method = method;
            cfg.sigma = gen.uniform(0.1, 1.0);
            cfg.iou_threshold = gen.uniform(0.0, 0.8);
            const auto got = eval::soft_nms(segs, cfg), want = oracle::soft_nms(segs, cfg);
            if (got.size() != want.size()) {
                ++mismatched;
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                if (got[i].start != want[i].start || got[i].end != want[i].end || got[i].label != want[i].label)
                    ++mismatched;
                worst = std::max(worst, std::abs(got[i].score - want[i].score));
            }
        }
    return {mismatched == 0 && worst <= kNmsTol,
            "linear + gaussian, 1000 instances each: max score diff " + fmt("%.1e", worst) + ", " +
                std::to_string(mismatched) + " ordering mismatches"};
}

Outcome map_oracle() {
    Gen gen(105);
    const std::vector<double> thr{0.3, 0.4, 0.5, 0.6, 0.7};
    double worst = 0.0;
    std::size_t bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<eval::Detection> dets;
        for (const auto& s : random_segments(gen, 20, 4)) dets.push_back({gen.coin() ? "a" : "b", s});
        std::vector<eval::GroundTruth> gts;
        for (const auto& s : random_segments(gen, 10, 4)) gts.push_back({gen.coin() ? "a" : "b", s.start, s.end, s.label});
        const auto got = eval::mean_average_precision(dets, gts, thr);
        const auto want = oracle::mean_average_precision(dets, gts, thr);
        if (got.average.has_value() == gts.empty()) {
            ++bad;
            continue;
        }
        if (!got.average) continue;
        worst = std::max(worst, std::abs(*got.average - want.average));
        for (std::size_t i = 0; i < thr.size(); ++i) worst = std::max(worst, std::abs(*got.map[i] - want.per_threshold[i]));
    }
    const std::vector<eval::GroundTruth> gt{{"v", 0.0, 10.0, 1}};
    const std::vector<eval::Detection> hand{{"v", {20.0, 30.0, 1, 0.9}}, {"v", {0.0, 10.0, 1, 0.5}}};
    const double ap = eval::average_precision(hand, gt, 0.5);
    return {bad == 0 && worst <= kMapTol && ap == 0.5,
            "1000 instances: max diff " + fmt("%.1e", worst) + "; hand case AP " + fmt("%.17g", ap)};
}

Outcome boundary_bounds() {
    Gen gen(106);
    std::size_t outside = 0, values = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        model::HeadConfig hc;
        hc.bins = gen.index(1, 16);
        hc.num_classes = 2;
        model::TridentHead head(3, hc, model::ParamInit(trial));
        randomize(head.parameters(), gen, 3.0);
        Graph g(false);
        const Tensor d =
            model::estimate_boundaries(head.forward(g, g.constant(gen.tensor({gen.index(1, 12), 3}, -3.0, 3.0)))).value();
        for (double v : d.values()) {
            ++values;
            if (!(v >= 0.0 && v <= static_cast<double>(hc.bins - 1))) ++outside;
        }
    }
    model::HeadConfig hc;
    model::TridentHead head(3, hc, model::ParamInit(0));
    for (ad::Parameter* p : head.parameters()) p->value.fill(0.0);
    Graph g(false);
    const Tensor d = model::estimate_boundaries(head.forward(g, g.constant(gen.tensor({9, 3})))).value();
    const double half = static_cast<double>(hc.bins - 1) / 2.0;
    bool uniform = true;
    for (double v : d.values()) uniform = uniform && v == half;
    return {outside == 0 && uniform, std::to_string(outside) + " of " + std::to_string(values) +
                                         " estimates outside [0, B-1]; uniform logits give " + fmt("%.17g", d[0]) +
                                         " for B=" + std::to_string(hc.bins)};
}

cli::RunConfig end_to_end_config(const testing::TempDir& dir) {
    cli::RunConfig cfg;  // 20 videos, T=128, D=16, C=3, noise 0.3, lr 1e-4
    cfg.set("train.epochs", "200");
    cfg.set("train.warmup_epochs", "100");
    cfg.set("train.max_steps", std::to_string(kEndToEndSteps));
    cfg.set("train.log_every", "100");
    cfg.set("eval.split", "train");
    cfg.set("data.dir", (dir / "data").string());
    cfg.set("run.dir", (dir / "run").string());
    return cfg;
}

Outcome end_to_end() {
    testing::TempDir dir("acceptance-e2e");
    const cli::RunConfig cfg = end_to_end_config(dir);
    std::ostringstream sink;
    const auto t0 = Clock::now();
    cli::cmd_synth(cfg, sink);
    const auto trained = cli::cmd_train(cfg, false, sink);
    const auto report = cli::cmd_eval(cfg, std::nullopt, std::nullopt, sink);
    const double elapsed = seconds_since(t0);
    const double avg = report.average.value_or(-1.0);
    return {avg >= kEndToEndMap && trained.steps <= kEndToEndSteps && elapsed <= kEndToEndBudgetSeconds,
            "train-split avg mAP@[0.3:0.1:0.7] " + fmt("%.4f", avg) + " after " + std::to_string(trained.steps) +
                " steps in " + fmt("%.1f", elapsed) + " s (need >= 0.85, <= 2000 steps, <= 600 s)"};
}

Outcome ablation() {
    testing::TempDir dir("acceptance-ablate");
    cli::RunConfig cfg;
    for (const char* kv : {"synth.num_videos=4", "synth.val_videos=2", "synth.length=32", "synth.dim=4",
                           "synth.classes=2", "synth.segments_min=1", "synth.segments_max=2",
                           "synth.segment_length_min=4", "synth.segment_length_max=8", "model.dim=8",
                           "model.levels=3", "train.epochs=3", "train.warmup_epochs=1", "train.batch_size=2"}) {
        const std::string s = kv;
        cfg.set(s.substr(0, s.find('=')), s.substr(s.find('=') + 1));
    }
    cfg.set("data.dir", (dir / "data").string());
    cfg.set("run.dir", (dir / "run").string());
    std::ostringstream sink;
    cli::cmd_synth(cfg, sink);
    const auto a = cli::cmd_ablate(cfg, sink), b = cli::cmd_ablate(cfg, sink);
    bool same_init = true, repeatable = a.runs.size() == b.runs.size();
    std::size_t with_context = 0;
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        same_init = same_init && a.runs[i].init_digest == a.runs[0].init_digest;
        with_context += a.runs[i].context;
        if (repeatable) repeatable = a.runs[i].final_loss == b.runs[i].final_loss;
    }
    repeatable = repeatable && a.component_table == b.component_table && a.fusion_table == b.fusion_table &&
                 a.matrix_table == b.matrix_table;
    return {a.runs.size() == 8 && with_context == 4 && same_init && repeatable,
            std::to_string(a.runs.size()) + " runs (" + std::to_string(with_context) + " with context), " +
                (same_init ? "shared" : "differing") + " initialization, " +
                (repeatable ? "identical" : "different") + " tables on rerun"};
}

Outcome fuzz() {
    Gen gen(107);
    std::size_t rejected = 0, accepted = 0, crashed = 0;
    const std::size_t cases = 10000;
    for (std::size_t c = 0; c < cases; ++c) {
        data::FeatureSequence seq;
        const std::size_t T = gen.index(1, 24), D = gen.index(1, 8);
        seq.values = gen.tensor({T, D}, -4.0, 4.0);
        seq.delta_seconds = gen.uniform(0.1, 1.0);
        seq.duration_seconds = static_cast<double>(T) * seq.delta_seconds;
        auto bytes = data::encode_features(seq);
        if (c % 2 == 0) {
            bytes.resize(gen.index(0, bytes.size() - 1));
        } else {
            const std::size_t bit = gen.index(0, bytes.size() * 8 - 1);
            bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        }
        try {
            data::decode_features(bytes);
            ++accepted;
        } catch (const FormatError&) {
            ++rejected;
        } catch (...) {
            ++crashed;
        }
    }
    return {rejected == cases, std::to_string(rejected) + "/" + std::to_string(cases) +
                                   " corrupted files rejected with FormatError (" + std::to_string(accepted) +
                                   " accepted, " + std::to_string(crashed) + " other errors)"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient-suite", gradient_suite},   {"residual-identity", residual_identity},
        {"fusion-equivalence", fusion_equivalence}, {"convexity-bound", convexity},
        {"soft-nms-oracle", soft_nms_oracle}, {"map-oracle", map_oracle},
        {"boundary-bounds", boundary_bounds}, {"end-to-end", end_to_end},
        {"ablation-harness", ablation},       {"format-robustness", fuzz},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
