// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <vector>

#include "tagdet/model/pyramid.hpp"
#include "tagdet/model/trident_head.hpp"

namespace tagdet::model {

struct ModelConfig {
    PyramidConfig pyramid;
    HeadConfig head;
};

struct LevelOutput {
    std::size_t stride = 1;
    HeadOutput head;
    ad::Var distances;  // T x 2, level units
};

/// Pyramid backbone followed by the shared trident head on every level.
class Detector {
public:
    Detector(const ModelConfig& cfg, std::uint64_t seed);

    std::vector<LevelOutput> forward(ad::Graph& g, ad::Var features);
    /// Forward without recording gradients; returns host tensors per level.
    std::vector<LevelPrediction> predict(const ad::Tensor& features);

    const ModelConfig& config() const noexcept { return cfg_; }
    PyramidBackbone& backbone() noexcept { return backbone_; }
    TridentHead& head() noexcept { return head_; }
    ParameterList parameters();

private:
    ModelConfig cfg_;
    PyramidBackbone backbone_;
    TridentHead head_;
};

}  // namespace tagdet::model
