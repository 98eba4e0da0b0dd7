// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/model/trident_head.hpp"

#include <cmath>

#include "tagdet/autodiff/ops.hpp"
#include "tagdet/errors.hpp"

namespace tagdet::model {

using ad::Graph;
using ad::Var;

void HeadConfig::validate() const {
    if (num_classes == 0) throw ConfigError("head: num_classes must be >= 1");
    if (bins == 0) throw ConfigError("head: bins must be >= 1");
    if (kernel % 2 == 0) throw ConfigError("head: kernel must be odd");
    if (!(prior_prob > 0.0 && prior_prob < 1.0)) throw ConfigError("head: prior_prob must lie in (0,1)");
}

TridentHead::TridentHead(std::size_t dim, const HeadConfig& cfg, const ParamInit& init) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t K = cfg_.kernel, B = cfg_.bins, C = cfg_.num_classes;
    auto conv = [&](const std::string& name, std::size_t out) {
        return Conv{init.fan_in(name + ".weight", {K, dim, out}, K * dim), init.constant(name + ".bias", {1, out}, 0.0)};
    };
    for (std::size_t i = 0; i < cfg_.depth; ++i) {
        cls_tower.push_back(conv("head.cls_tower" + std::to_string(i), dim));
        reg_tower.push_back(conv("head.reg_tower" + std::to_string(i), dim));
    }
    cls_out = conv("head.cls_out", C);
    cls_out.bias.value.fill(-std::log((1.0 - cfg_.prior_prob) / cfg_.prior_prob));
    start_out = conv("head.start_out", B);
    end_out = conv("head.end_out", B);
    center_out = conv("head.center_out", 2 * B);
}

HeadOutput TridentHead::forward(Graph& g, Var feature) {
    auto apply = [&](Conv& c, Var x) { return ad::conv1d(x, g.param(c.weight), g.param(c.bias)); };
    Var cls_feat = feature;
    for (Conv& c : cls_tower) cls_feat = ad::relu(apply(c, cls_feat));
    Var reg_feat = feature;
    for (Conv& c : reg_tower) reg_feat = ad::relu(apply(c, reg_feat));
    return HeadOutput{apply(cls_out, cls_feat), apply(start_out, reg_feat), apply(end_out, reg_feat),
                      apply(center_out, reg_feat)};
}

void TridentHead::zero_output_layers() {
    for (Conv* c : {&cls_out, &start_out, &end_out, &center_out}) {
        c->weight.value.fill(0.0);
        c->bias.value.fill(0.0);
    }
}

ParameterList TridentHead::parameters() {
    ParameterList out;
    for (Conv& c : cls_tower) out.insert(out.end(), {&c.weight, &c.bias});
    for (Conv& c : reg_tower) out.insert(out.end(), {&c.weight, &c.bias});
    for (Conv* c : {&cls_out, &start_out, &end_out, &center_out}) out.insert(out.end(), {&c->weight, &c->bias});
    return out;
}

Var estimate_boundaries(const HeadOutput& out) {
    const std::size_t T = out.start.shape().at(0), B = out.start.shape().at(1);
    if (out.end.shape() != out.start.shape() || out.center.shape() != ad::Shape{T, 2 * B})
        throw ShapeError("estimate_boundaries: inconsistent head shapes " + ad::shape_str(out.start.shape()) + ", " +
                         ad::shape_str(out.end.shape()) + ", " + ad::shape_str(out.center.shape()));

    std::vector<std::size_t> start_src(T * B), end_src(T * B);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t back = t >= b ? t - b : 0;
            const std::size_t fwd = std::min(t + b, T - 1);
            start_src[t * B + b] = back * B + b;
            end_src[t * B + b] = fwd * B + b;
        }
    auto expectation = [&](Var side_logits, std::vector<std::size_t> src, std::size_t center_begin) {
        Var combined = ad::add(ad::gather(side_logits, std::move(src), {T, B}),
                               ad::slice_cols(out.center, center_begin, center_begin + B));
        return ad::bin_expectation(combined);
    };
    return ad::concat_cols(expectation(out.start, std::move(start_src), 0),
                           expectation(out.end, std::move(end_src), B));
}

std::vector<ScoredSegment> decode(std::span<const LevelPrediction> levels, double delta_seconds, double min_score) {
    std::vector<ScoredSegment> out;
    for (const LevelPrediction& lvl : levels) {
        const std::size_t T = lvl.cls_prob.dim(0), C = lvl.cls_prob.dim(1);
        const double unit = static_cast<double>(lvl.stride) * delta_seconds;
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < C; ++c)
                if (lvl.cls_prob.at(t, c) > lvl.cls_prob.at(t, best)) best = c;
            const double score = lvl.cls_prob.at(t, best);
            if (score <= min_score) continue;
            const double pos = static_cast<double>(t);
            const double start = (pos - lvl.distances.at(t, 0)) * unit;
            const double end = (pos + lvl.distances.at(t, 1)) * unit;
            if (!(start < end)) continue;
            out.push_back({start, end, static_cast<int>(best) + 1, score});
        }
    }
    return out;
}

}  // namespace tagdet::model
