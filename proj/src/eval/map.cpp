// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/eval/map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "tagdet/errors.hpp"
#include "tagdet/eval/soft_nms.hpp"

namespace tagdet::eval {

double average_precision(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                         double threshold) {
    if (ground_truth.empty()) throw std::invalid_argument("average_precision: class has no ground truth");

    std::map<std::string, std::vector<std::size_t>> gt_by_video;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) gt_by_video[ground_truth[i].video].push_back(i);

    std::vector<std::size_t> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score_order(detections[a].segment, detections[b].segment);
    });

    std::vector<bool> matched(ground_truth.size(), false);
    std::vector<double> precision, recall;
    precision.reserve(order.size());
    recall.reserve(order.size());
    double tp = 0.0, fp = 0.0;
    const double n_gt = static_cast<double>(ground_truth.size());
    for (std::size_t idx : order) {
        const Detection& det = detections[idx];
        std::size_t best = ground_truth.size();
        double best_iou = -1.0;
        if (auto it = gt_by_video.find(det.video); it != gt_by_video.end()) {
            for (std::size_t g : it->second) {
                if (matched[g]) continue;
                const double iou = temporal_iou(det.segment.start, det.segment.end, ground_truth[g].start,
                                                ground_truth[g].end);
                if (iou > best_iou) {
                    best_iou = iou;
                    best = g;
                }
            }
        }
        if (best < ground_truth.size() && best_iou >= threshold) {
            matched[best] = true;
            tp += 1.0;
        } else {
            fp += 1.0;
        }
        precision.push_back(tp / (tp + fp));
        recall.push_back(tp / n_gt);
    }

    // Precision envelope, then sum over recall steps.
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

EvalReport mean_average_precision(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                                  std::span<const double> thresholds) {
    EvalReport report;
    report.thresholds.assign(thresholds.begin(), thresholds.end());

    std::set<int> labels;
    for (const Detection& d : detections) labels.insert(d.segment.label);
    for (const GroundTruth& g : ground_truth) labels.insert(g.label);
    report.classes.assign(labels.begin(), labels.end());

    std::map<int, std::vector<Detection>> det_by_class;
    std::map<int, std::vector<GroundTruth>> gt_by_class;
    for (const Detection& d : detections) det_by_class[d.segment.label].push_back(d);
    for (const GroundTruth& g : ground_truth) gt_by_class[g.label].push_back(g);
    for (int c : report.classes) report.gt_counts.push_back(static_cast<int>(gt_by_class[c].size()));

    std::vector<double> per_threshold;
    for (double thr : thresholds) {
        std::vector<std::optional<double>> row;
        double acc = 0.0;
        std::size_t n = 0;
        for (int c : report.classes) {
            const auto& gts = gt_by_class[c];
            if (gts.empty()) {
                row.emplace_back();
                continue;
            }
            const double ap = average_precision(det_by_class[c], gts, thr);
            row.emplace_back(ap);
            acc += ap;
            ++n;
        }
        report.ap.push_back(std::move(row));
        if (n == 0) {
            report.map.emplace_back();
        } else {
            report.map.emplace_back(acc / static_cast<double>(n));
            per_threshold.push_back(acc / static_cast<double>(n));
        }
    }
    if (!per_threshold.empty() && per_threshold.size() == thresholds.size()) {
        double s = 0.0;
        for (double v : per_threshold) s += v;
        report.average = s / static_cast<double>(per_threshold.size());
    }
    return report;
}

std::vector<double> parse_thresholds(const std::string& text) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw ConfigError("thresholds: cannot parse '" + s + "' in '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ConfigError("thresholds: range must be start:step:stop, got '" + text + "'");
        const double lo = number(parts[0]), step = number(parts[1]), hi = number(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ConfigError("thresholds: empty range '" + text + "'");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            // round to 1e-9 so 0.3 + 4 * 0.1 prints as 0.7
            out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
        }
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    }
    for (double t : out)
        if (!(t > 0.0 && t <= 1.0)) throw ConfigError("thresholds: value outside (0,1] in '" + text + "'");
    if (out.empty()) throw ConfigError("thresholds: empty list");
    return out;
}

}  // namespace tagdet::eval
