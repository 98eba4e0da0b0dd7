// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tagdet/autodiff/graph.hpp"
#include "tagdet/model/init.hpp"
#include "tagdet/segment.hpp"

namespace tagdet::model {

struct HeadConfig {
    std::size_t num_classes = 3;
    std::size_t bins = 16;
    std::size_t depth = 2;   // conv+ReLU layers in each tower
    std::size_t kernel = 3;
    double prior_prob = 0.01;  // initial class probability

    void validate() const;
};

/// Logit maps for one pyramid level: (T,C), (T,B), (T,B), (T,2B).
/// Columns [0,B) of `center` couple with the start side, [B,2B) with the end side.
struct HeadOutput {
    ad::Var cls;
    ad::Var start;
    ad::Var end;
    ad::Var center;
};

/// Classification tower plus start/end/center-offset regression heads, shared by all levels.
class TridentHead {
public:
    TridentHead(std::size_t dim, const HeadConfig& cfg, const ParamInit& init);

    HeadOutput forward(ad::Graph& g, ad::Var feature);

    /// Zero the four output layers (weights and biases).
    void zero_output_layers();

    const HeadConfig& config() const noexcept { return cfg_; }
    ParameterList parameters();

    struct Conv {
        ad::Parameter weight, bias;
    };
    std::vector<Conv> cls_tower, reg_tower;
    Conv cls_out, start_out, end_out, center_out;

private:
    HeadConfig cfg_;
};

/// Expected start/end distance per instant, T x 2, each in [0, B-1] level units.
/// p_start(b) = softmax_b(start[t-b, b] + center[t, b]), neighbours clamped;
/// the end side mirrors this with t+b and center[t, B+b].
ad::Var estimate_boundaries(const HeadOutput& out);

/// Host-side view of one level's predictions.
struct LevelPrediction {
    std::size_t stride = 1;
    ad::Tensor cls_prob;   // T x C
    ad::Tensor distances;  // T x 2
};

/// Turns per-instant predictions into segments in seconds:
/// start = (t - d_st) * stride * delta, end = (t + d_et) * stride * delta.
/// Class is the argmax probability (1-based) and score its value. Zero-length
/// or inverted segments and those scoring <= `min_score` are dropped.
std::vector<ScoredSegment> decode(std::span<const LevelPrediction> levels, double delta_seconds,
                                  double min_score = 0.0);

}  // namespace tagdet::model
