// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "tagdet/errors.hpp"
#include "tagdet/model/init.hpp"

namespace tagdet::data {
namespace {

// Distributions are mapped by hand from raw engine output; the standard
// library distributions differ across implementations.
class Rng {
public:
    explicit Rng(std::uint64_t key) {
        std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
        eng_.seed(seq);
    }

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Inclusive range.
    std::size_t integer(std::size_t lo, std::size_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do r = eng_();
        while (r >= limit);
        return lo + static_cast<std::size_t>(r % span);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do u1 = uniform();
        while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Placement {
    std::size_t begin;  // first row
    std::size_t end;    // one past the last row
    int label;
};

std::vector<Placement> place_disjoint(const SynthConfig& cfg, Rng& rng) {
    const std::size_t T = cfg.length;
    std::size_t n = rng.integer(cfg.segments_min, cfg.segments_max);
    std::vector<std::size_t> lengths;
    auto fits = [&] {
        std::size_t total = n - 1;
        for (std::size_t l : lengths) total += l;
        return total <= T;
    };
    for (;;) {
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            lengths.assign(n, 0);
            for (auto& l : lengths) l = rng.integer(cfg.segment_length_min, cfg.segment_length_max);
            placed = fits();
        }
        if (placed) break;
        if (n > cfg.segments_min) {
            --n;
            continue;
        }
        lengths.assign(n, cfg.segment_length_min);  // feasible by validate()
        break;
    }

    std::size_t used = n - 1;
    for (std::size_t l : lengths) used += l;
    const std::size_t slack = T - used;
    // Split the slack into n+1 gaps via sorted cut points.
    std::vector<std::size_t> cuts(n);
    for (auto& c : cuts) c = rng.integer(0, slack);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Placement> out;
    std::size_t cursor = 0;
    std::size_t prev_cut = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cursor += cuts[i] - prev_cut;
        prev_cut = cuts[i];
        const int label = static_cast<int>(rng.integer(1, cfg.classes));
        out.push_back({cursor, cursor + lengths[i], label});
        cursor += lengths[i] + 1;
    }
    return out;
}

std::vector<Placement> place_overlapping(const SynthConfig& cfg, Rng& rng) {
    const std::size_t n = rng.integer(cfg.segments_min, cfg.segments_max);
    std::vector<Placement> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = rng.integer(cfg.segment_length_min, std::min(cfg.segment_length_max, cfg.length));
        const std::size_t begin = rng.integer(0, cfg.length - len);
        out.push_back({begin, begin + len, static_cast<int>(rng.integer(1, cfg.classes))});
    }
    std::sort(out.begin(), out.end(), [](const Placement& a, const Placement& b) { return a.begin < b.begin; });
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("synth: " + msg); };
    if (num_videos < 1) fail("num_videos must be >= 1");
    if (length < 1) fail("length must be >= 1");
    if (dim < 1) fail("dim must be >= 1");
    if (classes < 1) fail("classes must be >= 1");
    if (segments_min < 1 || segments_min > segments_max) fail("need 1 <= segments_min <= segments_max");
    if (segment_length_min < 1 || segment_length_min > segment_length_max)
        fail("need 1 <= segment_length_min <= segment_length_max");
    if (!(noise >= 0.0) || !std::isfinite(noise)) fail("noise must be a finite value >= 0");
    if (!(delta_seconds > 0.0) || !std::isfinite(delta_seconds)) fail("delta_seconds must be positive");
    if (segment_length_min > length) fail("segment_length_min exceeds the video length");
    if (!allow_overlap && segments_min * segment_length_min + (segments_min - 1) > length)
        fail(std::to_string(segments_min) + " disjoint segments of " + std::to_string(segment_length_min) +
             " rows do not fit in " + std::to_string(length) + " rows");
}

ad::Tensor class_prototypes(std::size_t classes, std::size_t dim, std::uint64_t seed) {
    Rng rng(model::stable_hash("prototypes", seed));
    ad::Tensor p({classes, dim});
    for (std::size_t c = 0; c < classes; ++c) {
        double norm = 0.0;
        while (norm < 1e-6) {
            norm = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                p.at(c, d) = rng.normal();
                norm += p.at(c, d) * p.at(c, d);
            }
        }
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d) p.at(c, d) /= norm;
    }
    return p;
}

SyntheticSplit generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const ad::Tensor protos = class_prototypes(cfg.classes, cfg.dim, cfg.prototype_seed);
    SyntheticSplit split;
    for (std::size_t c = 1; c <= cfg.classes; ++c) split.annotations.labels.push_back("class_" + std::to_string(c));

    for (std::size_t v = 0; v < cfg.num_videos; ++v) {
        char id[64];
        std::snprintf(id, sizeof id, "%s_%04zu", cfg.id_prefix.c_str(), v);
        Rng rng(model::stable_hash(id, cfg.seed));
        const std::vector<Placement> segs = cfg.allow_overlap ? place_overlapping(cfg, rng) : place_disjoint(cfg, rng);

        ad::Tensor x({cfg.length, cfg.dim});
        for (double& e : x.values()) e = cfg.noise * rng.normal();
        for (const Placement& s : segs)
            for (std::size_t t = s.begin; t < s.end; ++t)
                for (std::size_t d = 0; d < cfg.dim; ++d) x.at(t, d) += protos.at(s.label - 1, d);

        FeatureSequence seq;
        seq.video_id = id;
        seq.values = std::move(x);
        seq.delta_seconds = cfg.delta_seconds;
        seq.duration_seconds = static_cast<double>(cfg.length) * cfg.delta_seconds;

        VideoAnnotation ann;
        ann.id = id;
        ann.duration = seq.duration_seconds;
        for (const Placement& s : segs)
            ann.segments.push_back({static_cast<double>(s.begin) * cfg.delta_seconds,
                                    static_cast<double>(s.end) * cfg.delta_seconds, s.label});
        split.features.push_back(std::move(seq));
        split.annotations.videos.push_back(std::move(ann));
    }
    return split;
}

}  // namespace tagdet::data
