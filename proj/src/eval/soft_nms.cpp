// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/eval/soft_nms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "tagdet/errors.hpp"

namespace tagdet::eval {

std::string_view to_string(NmsMethod m) {
    switch (m) {
        case NmsMethod::Linear: return "linear";
        case NmsMethod::Gaussian: return "gaussian";
        case NmsMethod::Hard: return "hard";
    }
    throw ConfigError("unknown nms method");
}

NmsMethod parse_nms_method(std::string_view name) {
    for (NmsMethod m : {NmsMethod::Linear, NmsMethod::Gaussian, NmsMethod::Hard})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown nms method '" + std::string(name) + "' (expected linear|gaussian|hard)");
}

bool score_order(const ScoredSegment& a, const ScoredSegment& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.label < b.label;
}

std::vector<ScoredSegment> soft_nms(std::vector<ScoredSegment> segments, const SoftNmsConfig& cfg) {
    if (cfg.method == NmsMethod::Gaussian && !(cfg.sigma > 0.0)) throw ConfigError("soft_nms: sigma must be > 0");

    std::map<int, std::vector<ScoredSegment>> by_class;
    for (const ScoredSegment& s : segments) by_class[s.label].push_back(s);

    std::vector<ScoredSegment> kept;
    kept.reserve(segments.size());
    for (auto& [label, pool] : by_class) {
        while (!pool.empty()) {
            auto best = std::min_element(pool.begin(), pool.end(), score_order);
            const ScoredSegment top = *best;
            pool.erase(best);
            kept.push_back(top);

            std::vector<ScoredSegment> survivors;
            survivors.reserve(pool.size());
            for (ScoredSegment s : pool) {
                const double iou = temporal_iou(top, s);
                double factor = 1.0;
                switch (cfg.method) {
                    case NmsMethod::Linear: factor = iou > cfg.iou_threshold ? 1.0 - iou : 1.0; break;
                    case NmsMethod::Gaussian: factor = std::exp(-(iou * iou) / cfg.sigma); break;
                    case NmsMethod::Hard: factor = iou > cfg.iou_threshold ? 0.0 : 1.0; break;
                }
                s.score *= factor;
                if (s.score >= cfg.min_score) survivors.push_back(s);
            }
            pool = std::move(survivors);
        }
    }
    std::sort(kept.begin(), kept.end(), score_order);
    return kept;
}

}  // namespace tagdet::eval
