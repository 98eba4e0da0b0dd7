// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "tagdet/eval/soft_nms.hpp"
#include "tagdet/model/trident_head.hpp"

namespace tagdet::eval {

struct InferenceConfig {
    double score_threshold = 0.001;  // lambda: candidates must score above this
    std::size_t top_k = 2000;        // pre-NMS cap per video
    std::size_t max_detections = 0;  // post-NMS cap per video, 0 for none
    SoftNmsConfig nms;
};

/// Threshold, cap, clip to [0, duration], then Soft-NMS.
std::vector<ScoredSegment> postprocess(std::vector<ScoredSegment> candidates, double duration,
                                       const InferenceConfig& cfg);

/// decode() followed by postprocess().
std::vector<ScoredSegment> detect(std::span<const model::LevelPrediction> levels, double delta_seconds,
                                  double duration, const InferenceConfig& cfg);

}  // namespace tagdet::eval
