// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tagdet/autodiff/ops.hpp"

namespace tagdet::train {

struct LossConfig {
    double alpha = 0.25;  // focal
    double gamma = 2.0;   // focal
    ad::IouVariant iou = ad::IouVariant::Plain;
    double center_radius = 1.5;  // in level strides
    double iou_floor = 0.01;     // lower bound of the IoU weight on positive classification
    double cls_weight = 1.0;
    double reg_weight = 1.0;

    void validate() const;
};

/// A ground-truth segment in input-instant units (seconds / delta).
struct InstantSegment {
    double start = 0.0;
    double end = 0.0;
    int label = 0;  // 1..C
};

/// Regression range of level `level` (0-based) in input-instant units: level 0
/// covers [0, B-1], level l covers ((B-1) 2^(l-1), (B-1) 2^l], and the last
/// level is open-ended.
struct RegressionRange {
    double lower;  // exclusive, except for level 0
    double upper;  // inclusive
};
RegressionRange regression_range(std::size_t level, std::size_t num_levels, std::size_t bins);

struct LevelTargets {
    std::size_t stride = 1;
    std::vector<int> label;          // 0 background, else 1..C
    std::vector<double> start_dist;  // level units, valid where label > 0
    std::vector<double> end_dist;
    std::vector<int> segment;        // index into the input segments, -1 for background
};

struct AssignedTargets {
    std::vector<LevelTargets> levels;
    std::size_t rejected_segments = 0;

    std::size_t num_positive() const;
    std::size_t num_negative() const;
};

/// Center sampling. Instant t of level l (position p = t * s_l) is positive for
/// segment a when |p - center(a)| <= radius * s_l, p lies strictly inside a, and
/// max(p - start, end - p) falls in the level's regression range. Overlaps go to
/// the shortest segment. Segments outside [0, video_length] are skipped and counted.
AssignedTargets assign_targets(std::span<const InstantSegment> segments, double video_length,
                               std::span<const std::size_t> level_lengths, std::span<const std::size_t> strides,
                               std::size_t bins, const LossConfig& cfg);

}  // namespace tagdet::train
