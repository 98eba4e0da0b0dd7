// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>

namespace tagdet {

/// A scored, labelled temporal interval. Labels are 1-based class ids.
struct ScoredSegment {
    double start = 0.0;
    double end = 0.0;
    int label = 0;
    double score = 0.0;
};

/// Intersection over union of [a0, a1] and [b0, b1]; 0 when disjoint.
inline double temporal_iou(double a0, double a1, double b0, double b1) {
    const double inter = std::min(a1, b1) - std::max(a0, b0);
    if (inter <= 0.0) return 0.0;
    const double uni = (a1 - a0) + (b1 - b0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double temporal_iou(const ScoredSegment& a, const ScoredSegment& b) {
    return temporal_iou(a.start, a.end, b.start, b.end);
}

}  // namespace tagdet
