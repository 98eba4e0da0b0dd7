// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/train/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tagdet/errors.hpp"
#include "tagdet/model/init.hpp"

namespace tagdet::train {

void TrainConfig::validate() const {
    if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
    if (warmup_epochs > epochs) throw ConfigError("train: warmup epochs exceed epochs");
    if (batch_size == 0) throw ConfigError("train: batch size must be >= 1");
    if (!(lr >= 0.0)) throw ConfigError("train: lr must be >= 0");
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

Trainer::Trainer(model::Detector& model, const TrainConfig& cfg, const LossConfig& loss,
                 std::vector<TrainSample> samples)
    : model_(model),
      cfg_(cfg),
      loss_cfg_(loss),
      samples_(std::move(samples)),
      steps_per_epoch_(ceil_div(std::max<std::size_t>(samples_.size(), 1), cfg.batch_size)),
      schedule_(cfg.lr, cfg.warmup_epochs * steps_per_epoch_, cfg.epochs * steps_per_epoch_),
      adam_(model.parameters(), cfg.adam) {
    cfg_.validate();
    loss_cfg_.validate();
    if (samples_.empty()) throw ConfigError("train: dataset is empty");
    const auto& mc = model_.config();
    for (const TrainSample& s : samples_) {
        if (s.features.rank() != 2 || s.features.dim(1) != mc.pyramid.input_dim)
            throw ShapeError("train: sample " + s.id + " has features " + ad::shape_str(s.features.shape()) +
                             ", model expects T x " + std::to_string(mc.pyramid.input_dim));
        const std::size_t T = s.features.dim(0);
        const auto lengths = model::pyramid_lengths(T, mc.pyramid.levels);
        std::vector<std::size_t> strides;
        for (std::size_t l = 0; l < lengths.size(); ++l) strides.push_back(std::size_t{1} << l);
        targets_.push_back(
            assign_targets(s.segments, static_cast<double>(T), lengths, strides, mc.head.bins, loss_cfg_));
    }
}

std::size_t Trainer::planned_steps() const noexcept {
    const std::size_t full = schedule_.total_steps();
    return cfg_.max_steps == 0 ? full : std::min(full, cfg_.max_steps);
}

void Trainer::seek(std::size_t step) { step_ = step; }

std::vector<std::size_t> Trainer::epoch_order(std::size_t epoch) const {
    std::vector<std::size_t> order(samples_.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(model::stable_hash("epoch" + std::to_string(epoch), cfg_.seed));
    // Fisher-Yates with a portable index draw.
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

StepRecord Trainer::train_step() {
    StepRecord rec;
    rec.step = step_;
    rec.epoch = step_ / steps_per_epoch_;
    rec.lr = schedule_.at(step_);

    const std::vector<std::size_t> order = epoch_order(rec.epoch);
    const std::size_t begin = (step_ % steps_per_epoch_) * cfg_.batch_size;
    const std::size_t end = std::min(begin + cfg_.batch_size, order.size());

    LossNormalizer norm;
    for (std::size_t i = begin; i < end; ++i) {
        norm.positives += static_cast<double>(targets_[order[i]].num_positive());
        norm.negatives += static_cast<double>(targets_[order[i]].num_negative());
    }

    adam_.zero_grad();
    for (std::size_t i = begin; i < end; ++i) {
        const TrainSample& s = samples_[order[i]];
        ad::Graph g;
        auto outputs = model_.forward(g, g.constant(s.features));
        LossTerms terms = composite_loss(outputs, targets_[order[i]], loss_cfg_, norm);
        g.backward(terms.total);
        rec.loss += terms.total.value().item();
        if (norm.positives > 0) {
            rec.cls_pos += terms.cls_pos / norm.positives;
            rec.reg += terms.reg / norm.positives;
        }
        if (norm.negatives > 0) rec.cls_neg += terms.cls_neg / norm.negatives;
        rec.positives += terms.positives;
    }
    adam_.step(rec.lr);
    ++step_;
    return rec;
}

}  // namespace tagdet::train
