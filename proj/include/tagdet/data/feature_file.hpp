// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tagdet/autodiff/tensor.hpp"

namespace tagdet::data {

/// Temporal features of one video: T rows of D values, each row covering
/// `delta_seconds` of video.
struct FeatureSequence {
    std::string video_id;
    ad::Tensor values;  // T x D
    double delta_seconds = 1.0;
    double duration_seconds = 0.0;

    std::size_t length() const { return values.dim(0); }
    std::size_t dim() const { return values.dim(1); }
    /// Throws FormatError/ShapeError on broken invariants.
    void validate() const;
};

/// Feature file layout, little-endian:
///   offset 0   "TADF"
///   offset 4   u16 version
///   offset 6   u32 T
///   offset 10  u32 D
///   offset 14  f64 delta_seconds
///   offset 22  f64 duration_seconds
///   offset 30  T*D f32, row-major
/// Version 2 appends a u32 CRC-32 of every preceding byte.
inline constexpr std::uint16_t kFeatureFileV1 = 1;
inline constexpr std::uint16_t kFeatureFileV2 = 2;
inline constexpr std::size_t kFeatureHeaderSize = 30;

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq, std::uint16_t version = kFeatureFileV2);
/// Throws FormatError naming the byte offset of the first problem.
FeatureSequence decode_features(std::span<const std::uint8_t> bytes, std::string video_id = {});

void write_features(const std::filesystem::path& path, const FeatureSequence& seq,
                    std::uint16_t version = kFeatureFileV2);
/// Reads and validates; `expected_dim` (from a dataset manifest) must match D when given.
FeatureSequence load_features(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = {});

}  // namespace tagdet::data
