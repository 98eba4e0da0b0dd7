// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include "tagdet/model/detector.hpp"
#include "tagdet/train/targets.hpp"

namespace tagdet::train {

/// Positive/negative instant counts the loss is normalized by. For a batch these
/// are batch totals, so per-video losses sum to the batch loss.
struct LossNormalizer {
    double positives = 0.0;
    double negatives = 0.0;
};

struct LossTerms {
    ad::Var total;
    double cls_pos = 0.0;  // sum of IoU-weighted focal terms over positives, before normalization
    double reg = 0.0;      // sum of IoU losses over positives, before normalization
    double cls_neg = 0.0;  // sum of focal terms over negatives, before normalization
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

/// Per-level IoU between each positive's decoded prediction and its ground truth,
/// clamped below by cfg.iou_floor. Read from forward values; carries no gradient.
std::vector<std::vector<double>> iou_weights(std::span<const model::LevelOutput> outputs,
                                             const AssignedTargets& targets, const LossConfig& cfg);

/// L = (1/N_pos) sum_pos (w_iou * L_cls + L_reg) + (1/N_neg) sum_neg L_cls.
/// A term whose normalizer is zero is omitted.
LossTerms composite_loss(std::span<const model::LevelOutput> outputs, const AssignedTargets& targets,
                         const LossConfig& cfg, LossNormalizer norm);

/// As above with caller-supplied IoU weights (one vector per level, one entry per positive).
LossTerms composite_loss(std::span<const model::LevelOutput> outputs, const AssignedTargets& targets,
                         const LossConfig& cfg, LossNormalizer norm,
                         const std::vector<std::vector<double>>& weights);

}  // namespace tagdet::train
