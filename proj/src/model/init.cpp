// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/model/init.hpp"

#include <cmath>
#include <cstring>
#include <random>

namespace tagdet::model {

std::uint64_t stable_hash(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ad::Parameter ParamInit::uniform(std::string name, ad::Shape shape, double bound) const {
    const std::uint64_t key = stable_hash(name, stable_hash(std::to_string(seed_)));
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    std::mt19937_64 rng(seq);
    // Hand-rolled mapping from raw bits; std::uniform_real_distribution is not
    // specified bit-for-bit across standard libraries.
    ad::Tensor t(std::move(shape));
    for (auto& v : t.values()) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = (2.0 * u - 1.0) * bound;
    }
    return ad::Parameter(std::move(name), std::move(t));
}

ad::Parameter ParamInit::fan_in(std::string name, ad::Shape shape, std::size_t fan_in) const {
    return uniform(std::move(name), std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

ad::Parameter ParamInit::constant(std::string name, ad::Shape shape, double value) const {
    return ad::Parameter(std::move(name), ad::Tensor(std::move(shape), value));
}

std::uint64_t parameter_digest(const ParameterList& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const ad::Parameter* p : params) {
        h = stable_hash(p->name, h);
        for (double v : p->value.values()) {
            char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            h = stable_hash(std::string_view(bytes, sizeof bytes), h);
        }
    }
    return h;
}

}  // namespace tagdet::model
