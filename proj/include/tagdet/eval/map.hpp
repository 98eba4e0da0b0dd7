// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagdet/segment.hpp"

namespace tagdet::eval {

struct Detection {
    std::string video;
    ScoredSegment segment;
};

struct GroundTruth {
    std::string video;
    double start = 0.0;
    double end = 0.0;
    int label = 0;
};

struct EvalReport {
    std::vector<double> thresholds;
    std::vector<int> classes;                        // every class id seen in predictions or ground truth
    std::vector<int> gt_counts;                      // per class
    std::vector<std::vector<std::optional<double>>> ap;  // [threshold][class]; empty for classes without ground truth
    std::vector<std::optional<double>> map;          // per threshold; empty when no class has ground truth
    std::optional<double> average;                   // mean of `map`; empty means "no-gt"

    bool has_ground_truth() const { return average.has_value(); }
};

/// Area under the precision-recall curve with the precision envelope (all points),
/// for one class. Detections are matched greedily in score order (ties: earlier
/// start) to the unmatched ground truth of the same video with highest IoU, and
/// count as true positives when that IoU >= threshold.
double average_precision(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                         double threshold);

/// Per-class AP at every threshold, mAP over classes with at least one ground truth,
/// and the average over thresholds.
EvalReport mean_average_precision(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                                  std::span<const double> thresholds);

/// Parses "0.3:0.1:0.7" (inclusive range) or "0.1,0.3,0.5".
std::vector<double> parse_thresholds(const std::string& text);

}  // namespace tagdet::eval
