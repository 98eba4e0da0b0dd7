// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/eval/postprocess.hpp"

#include <algorithm>

namespace tagdet::eval {

std::vector<ScoredSegment> postprocess(std::vector<ScoredSegment> candidates, double duration,
                                       const InferenceConfig& cfg) {
    std::erase_if(candidates, [&](const ScoredSegment& s) { return !(s.score > cfg.score_threshold); });
    std::sort(candidates.begin(), candidates.end(), score_order);
    if (cfg.top_k > 0 && candidates.size() > cfg.top_k) candidates.resize(cfg.top_k);
    for (ScoredSegment& s : candidates) {
        s.start = std::clamp(s.start, 0.0, duration);
        s.end = std::clamp(s.end, 0.0, duration);
    }
    std::erase_if(candidates, [](const ScoredSegment& s) { return !(s.start < s.end); });
    std::vector<ScoredSegment> out = soft_nms(std::move(candidates), cfg.nms);
    if (cfg.max_detections > 0 && out.size() > cfg.max_detections) out.resize(cfg.max_detections);
    return out;
}

std::vector<ScoredSegment> detect(std::span<const model::LevelPrediction> levels, double delta_seconds,
                                  double duration, const InferenceConfig& cfg) {
    return postprocess(model::decode(levels, delta_seconds, cfg.score_threshold), duration, cfg);
}

}  // namespace tagdet::eval
