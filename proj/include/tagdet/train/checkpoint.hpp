// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tagdet/model/init.hpp"
#include "tagdet/train/optim.hpp"

namespace tagdet::train {

struct NamedTensor {
    std::string name;
    ad::Tensor value;
};

/// Binary layout (all little-endian):
///   "TADC" u16 version=1
///   u32 len, config text
///   u64 step
///   u32 n, n x tensor         -- parameters
///   u32 n, n x tensor         -- Adam first moments, same order
///   u32 n, n x tensor         -- Adam second moments
/// tensor := u32 name_len, name, u32 rank, rank x u32 dim, prod(dim) x f64
struct Checkpoint {
    std::string config;
    std::uint64_t step = 0;
    std::vector<NamedTensor> params;
    std::vector<NamedTensor> adam_m;
    std::vector<NamedTensor> adam_v;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Snapshot of parameters and (optionally) optimizer state.
Checkpoint capture(const model::ParameterList& params, const Adam* optimizer, std::string config, std::uint64_t step);
/// Copies values back by name. Missing names or shape mismatches throw.
void restore_parameters(const model::ParameterList& params, const Checkpoint& ckpt);
void restore_optimizer(Adam& optimizer, const Checkpoint& ckpt);

}  // namespace tagdet::train
