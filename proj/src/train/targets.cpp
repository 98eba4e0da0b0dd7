// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/train/targets.hpp"

#include <cmath>

#include "tagdet/errors.hpp"
#include "tagdet/log.hpp"

namespace tagdet::train {

void LossConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("loss: alpha must lie in (0,1)");
    if (!(gamma >= 0.0)) throw ConfigError("loss: gamma must be >= 0");
    if (!(center_radius > 0.0)) throw ConfigError("loss: center radius must be > 0");
    if (!(iou_floor >= 0.0 && iou_floor <= 1.0)) throw ConfigError("loss: iou floor must lie in [0,1]");
}

RegressionRange regression_range(std::size_t level, std::size_t num_levels, std::size_t bins) {
    const double span = static_cast<double>(bins - 1);
    const double lower = level == 0 ? 0.0 : span * std::ldexp(1.0, static_cast<int>(level) - 1);
    const double upper =
        level + 1 == num_levels ? std::numeric_limits<double>::infinity() : span * std::ldexp(1.0, static_cast<int>(level));
    return {lower, upper};
}

std::size_t AssignedTargets::num_positive() const {
    std::size_t n = 0;
    for (const auto& lvl : levels)
        for (int c : lvl.label) n += c > 0;
    return n;
}

std::size_t AssignedTargets::num_negative() const {
    std::size_t n = 0;
    for (const auto& lvl : levels)
        for (int c : lvl.label) n += c == 0;
    return n;
}

AssignedTargets assign_targets(std::span<const InstantSegment> segments, double video_length,
                               std::span<const std::size_t> level_lengths, std::span<const std::size_t> strides,
                               std::size_t bins, const LossConfig& cfg) {
    if (level_lengths.size() != strides.size())
        throw ShapeError("assign_targets: " + std::to_string(level_lengths.size()) + " level lengths vs " +
                         std::to_string(strides.size()) + " strides");
    AssignedTargets out;
    std::vector<bool> usable(segments.size(), true);
    for (std::size_t a = 0; a < segments.size(); ++a) {
        const InstantSegment& s = segments[a];
        if (!(s.start < s.end)) throw ConfigError("assign_targets: segment with start >= end");
        if (s.start < 0.0 || s.end > video_length) {
            usable[a] = false;
            ++out.rejected_segments;
            log::warn("assign_targets: segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                      "] lies outside the video extent [0, " + std::to_string(video_length) + "]; skipped");
        }
    }

    const std::size_t L = level_lengths.size();
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t T = level_lengths[l];
        const double stride = static_cast<double>(strides[l]);
        const RegressionRange range = regression_range(l, L, bins);
        LevelTargets lt;
        lt.stride = strides[l];
        lt.label.assign(T, 0);
        lt.start_dist.assign(T, 0.0);
        lt.end_dist.assign(T, 0.0);
        lt.segment.assign(T, -1);
        for (std::size_t t = 0; t < T; ++t) {
            const double p = static_cast<double>(t) * stride;
            double best_len = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < segments.size(); ++a) {
                if (!usable[a]) continue;
                const InstantSegment& s = segments[a];
                const double center = 0.5 * (s.start + s.end);
                if (std::abs(p - center) > cfg.center_radius * stride) continue;
                const double ds = p - s.start, de = s.end - p;
                if (ds <= 0.0 || de <= 0.0) continue;
                const double reach = std::max(ds, de);
                const bool in_range = l == 0 ? reach <= range.upper : (reach > range.lower && reach <= range.upper);
                if (!in_range) continue;
                const double len = s.end - s.start;
                if (len < best_len) {
                    best_len = len;
                    lt.label[t] = s.label;
                    lt.start_dist[t] = ds / stride;
                    lt.end_dist[t] = de / stride;
                    lt.segment[t] = static_cast<int>(a);
                }
            }
        }
        out.levels.push_back(std::move(lt));
    }
    return out;
}

}  // namespace tagdet::train
