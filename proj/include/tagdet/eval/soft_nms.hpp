// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string_view>
#include <vector>

#include "tagdet/segment.hpp"

namespace tagdet::eval {

enum class NmsMethod {
    Linear,    // s *= 1 - IoU when IoU > iou_threshold
    Gaussian,  // s *= exp(-IoU^2 / sigma)
    Hard,      // debug only: s = 0 when IoU > iou_threshold
};

std::string_view to_string(NmsMethod m);
NmsMethod parse_nms_method(std::string_view name);

struct SoftNmsConfig {
    NmsMethod method = NmsMethod::Gaussian;
    double sigma = 0.5;
    double iou_threshold = 0.5;
    double min_score = 0.001;  // segments decayed below this are dropped
};

/// Score-decaying NMS, run independently per class. Repeatedly takes the best
/// remaining segment (ties: earlier start) and decays the rest of its class.
/// Output is sorted by final score, ties by earlier start then class.
std::vector<ScoredSegment> soft_nms(std::vector<ScoredSegment> segments, const SoftNmsConfig& cfg);

/// Orders by score descending, then earlier start, then smaller class id.
bool score_order(const ScoredSegment& a, const ScoredSegment& b);

}  // namespace tagdet::eval
