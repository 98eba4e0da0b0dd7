// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/train/loss.hpp"

#include <cmath>
#include <optional>

#include "tagdet/errors.hpp"
#include "tagdet/segment.hpp"

namespace tagdet::train {
namespace {

void check_finite(double v, const char* term) {
    if (!std::isfinite(v)) throw NumericFault(std::string("composite_loss: non-finite ") + term + " term");
}

ad::Var accumulate(std::optional<ad::Var>& acc, ad::Var v) {
    acc = acc ? ad::add(*acc, v) : v;
    return *acc;
}

}  // namespace

std::vector<std::vector<double>> iou_weights(std::span<const model::LevelOutput> outputs,
                                             const AssignedTargets& targets, const LossConfig& cfg) {
    if (outputs.size() != targets.levels.size())
        throw ShapeError("iou_weights: " + std::to_string(outputs.size()) + " output levels vs " +
                         std::to_string(targets.levels.size()) + " target levels");
    std::vector<std::vector<double>> out(outputs.size());
    for (std::size_t l = 0; l < outputs.size(); ++l) {
        const ad::Tensor& d = outputs[l].distances.value();
        const LevelTargets& lt = targets.levels[l];
        for (std::size_t t = 0; t < lt.label.size(); ++t) {
            if (lt.label[t] <= 0) continue;
            const double iou = temporal_iou(-d.at(t, 0), d.at(t, 1), -lt.start_dist[t], lt.end_dist[t]);
            out[l].push_back(std::max(iou, cfg.iou_floor));
        }
    }
    return out;
}

LossTerms composite_loss(std::span<const model::LevelOutput> outputs, const AssignedTargets& targets,
                         const LossConfig& cfg, LossNormalizer norm) {
    return composite_loss(outputs, targets, cfg, norm, iou_weights(outputs, targets, cfg));
}

LossTerms composite_loss(std::span<const model::LevelOutput> outputs, const AssignedTargets& targets,
                         const LossConfig& cfg, LossNormalizer norm,
                         const std::vector<std::vector<double>>& weights) {
    if (outputs.empty()) throw ShapeError("composite_loss: no pyramid levels");
    if (outputs.size() != targets.levels.size() || weights.size() != outputs.size())
        throw ShapeError("composite_loss: level count mismatch between outputs, targets and weights");
    ad::Graph& g = outputs.front().head.cls.graph();

    LossTerms terms;
    std::optional<ad::Var> pos_sum, neg_sum;
    for (std::size_t l = 0; l < outputs.size(); ++l) {
        const model::LevelOutput& out = outputs[l];
        const LevelTargets& lt = targets.levels[l];
        const std::size_t T = out.head.cls.shape().at(0), C = out.head.cls.shape().at(1);
        if (lt.label.size() != T)
            throw ShapeError("composite_loss: level " + std::to_string(l) + " has " + std::to_string(T) +
                             " instants but " + std::to_string(lt.label.size()) + " targets");

        std::vector<std::size_t> pos, neg;
        for (std::size_t t = 0; t < T; ++t) (lt.label[t] > 0 ? pos : neg).push_back(t);
        if (weights[l].size() != pos.size())
            throw ShapeError("composite_loss: level " + std::to_string(l) + " weight count mismatch");
        terms.positives += pos.size();
        terms.negatives += neg.size();

        if (!pos.empty() && norm.positives > 0.0) {
            ad::Tensor onehot({pos.size(), C});
            ad::Tensor gt({pos.size(), 2});
            std::vector<double> cls_w(pos.size()), reg_w(pos.size(), cfg.reg_weight);
            for (std::size_t i = 0; i < pos.size(); ++i) {
                const int label = lt.label[pos[i]];
                if (label < 1 || static_cast<std::size_t>(label) > C)
                    throw ShapeError("composite_loss: label " + std::to_string(label) + " outside 1.." +
                                     std::to_string(C));
                onehot.at(i, static_cast<std::size_t>(label - 1)) = 1.0;
                gt.at(i, 0) = lt.start_dist[pos[i]];
                gt.at(i, 1) = lt.end_dist[pos[i]];
                cls_w[i] = cfg.cls_weight * weights[l][i];
            }
            ad::Var cls = ad::sigmoid_focal_loss(ad::gather_rows(out.head.cls, pos), onehot, cls_w, cfg.alpha, cfg.gamma);
            ad::Var reg = ad::iou_loss(ad::gather_rows(out.distances, pos), gt, reg_w, cfg.iou);
            check_finite(cls.value().item(), "positive classification");
            check_finite(reg.value().item(), "regression");
            terms.cls_pos += cls.value().item();
            terms.reg += reg.value().item();
            accumulate(pos_sum, ad::add(cls, reg));
        }
        if (!neg.empty() && norm.negatives > 0.0) {
            ad::Tensor zeros({neg.size(), C});
            std::vector<double> w(neg.size(), cfg.cls_weight);
            ad::Var cls = ad::sigmoid_focal_loss(ad::gather_rows(out.head.cls, neg), zeros, w, cfg.alpha, cfg.gamma);
            check_finite(cls.value().item(), "negative classification");
            terms.cls_neg += cls.value().item();
            accumulate(neg_sum, cls);
        }
    }

    std::optional<ad::Var> total;
    if (pos_sum) accumulate(total, ad::scale(*pos_sum, 1.0 / norm.positives));
    if (neg_sum) accumulate(total, ad::scale(*neg_sum, 1.0 / norm.negatives));
    terms.total = total ? *total : g.constant(ad::Tensor::scalar(0.0));
    check_finite(terms.total.value().item(), "total");
    return terms;
}

}  // namespace tagdet::train
