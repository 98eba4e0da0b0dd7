// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tagdet/autodiff/tensor.hpp"
#include "tagdet/data/annotations.hpp"
#include "tagdet/data/feature_file.hpp"

namespace tagdet::data {

/// Synthetic detection data: each class owns a unit-norm prototype vector.
/// Background rows are N(0, noise^2); rows inside a segment are the class
/// prototype plus the same noise. Segment boundaries fall on row boundaries.
struct SynthConfig {
    std::size_t num_videos = 20;
    std::size_t length = 128;  // rows per video
    std::size_t dim = 16;
    std::size_t classes = 3;
    std::size_t segments_min = 2;  // per video
    std::size_t segments_max = 4;
    std::size_t segment_length_min = 8;  // rows
    std::size_t segment_length_max = 24;
    double noise = 0.3;
    double delta_seconds = 0.5;
    std::uint64_t seed = 0;
    /// Prototypes depend only on this seed, so splits generated with
    /// different `seed`s share classes.
    std::uint64_t prototype_seed = 7;
    /// Place segments independently; overlapping rows sum their prototypes.
    bool allow_overlap = false;
    std::string id_prefix = "video";

    /// Throws ConfigError, including when segments_min segments of
    /// segment_length_min rows cannot fit in one video.
    void validate() const;
};

struct SyntheticSplit {
    std::vector<FeatureSequence> features;
    AnnotationSet annotations;
};

/// C x D matrix of unit-norm prototypes.
ad::Tensor class_prototypes(std::size_t classes, std::size_t dim, std::uint64_t seed);

/// Deterministic in the config.
SyntheticSplit generate_synthetic(const SynthConfig& cfg);

}  // namespace tagdet::data
