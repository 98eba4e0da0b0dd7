// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tagdet/autodiff/tensor.hpp"

namespace tagdet::model {

using ParameterList = std::vector<ad::Parameter*>;

/// FNV-1a; stable across platforms and standard libraries.
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Seeded initializer. Each parameter draws from its own stream keyed by
/// (seed, name), so a parameter's initial value does not depend on which other
/// parameters exist.
class ParamInit {
public:
    explicit ParamInit(std::uint64_t seed) : seed_(seed) {}

    ad::Parameter uniform(std::string name, ad::Shape shape, double bound) const;
    /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    ad::Parameter fan_in(std::string name, ad::Shape shape, std::size_t fan_in) const;
    ad::Parameter constant(std::string name, ad::Shape shape, double value) const;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

/// Digest of parameter names and values, in list order.
std::uint64_t parameter_digest(const ParameterList& params);

}  // namespace tagdet::model
