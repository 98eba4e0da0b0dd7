// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/model/detector.hpp"

#include <cmath>

#include "tagdet/autodiff/ops.hpp"

namespace tagdet::model {

Detector::Detector(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), backbone_(cfg.pyramid, ParamInit(seed)), head_(cfg.pyramid.tag.dim, cfg.head, ParamInit(seed)) {}

std::vector<LevelOutput> Detector::forward(ad::Graph& g, ad::Var features) {
    PyramidOutput pyr = backbone_.forward(g, features);
    std::vector<LevelOutput> out;
    out.reserve(pyr.levels.size());
    for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
        HeadOutput h = head_.forward(g, pyr.levels[l]);
        ad::Var d = estimate_boundaries(h);
        out.push_back({pyr.strides[l], h, d});
    }
    return out;
}

std::vector<LevelPrediction> Detector::predict(const ad::Tensor& features) {
    ad::Graph g(false);
    std::vector<LevelOutput> levels = forward(g, g.constant(features));
    std::vector<LevelPrediction> out;
    out.reserve(levels.size());
    for (const LevelOutput& lvl : levels) {
        ad::Tensor prob = lvl.head.cls.value();
        for (auto& v : prob.values()) v = 1.0 / (1.0 + std::exp(-v));
        out.push_back({lvl.stride, std::move(prob), lvl.distances.value()});
    }
    return out;
}

ParameterList Detector::parameters() {
    ParameterList out = backbone_.parameters();
    ParameterList h = head_.parameters();
    out.insert(out.end(), h.begin(), h.end());
    return out;
}

}  // namespace tagdet::model
