// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tagdet/model/detector.hpp"
#include "tagdet/train/loss.hpp"
#include "tagdet/train/optim.hpp"

namespace tagdet::train {

struct TrainConfig {
    std::size_t epochs = 40;
    std::size_t warmup_epochs = 20;
    double lr = 1e-4;
    std::size_t batch_size = 2;
    std::size_t max_steps = 0;  // 0: run the full schedule
    AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainSample {
    std::string id;
    ad::Tensor features;  // T x D_in
    std::vector<InstantSegment> segments;
};

struct StepRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double cls_pos = 0.0;  // normalized contributions to `loss`
    double reg = 0.0;
    double cls_neg = 0.0;
    std::size_t positives = 0;
};

/// Mini-batch Adam over a fixed sample set. The batch order of epoch e is a
/// permutation seeded by (seed, e), so a resumed run replays the same order.
class Trainer {
public:
    Trainer(model::Detector& model, const TrainConfig& cfg, const LossConfig& loss, std::vector<TrainSample> samples);

    std::size_t steps_per_epoch() const noexcept { return steps_per_epoch_; }
    /// Length of the lr schedule (epochs x steps per epoch).
    std::size_t schedule_steps() const noexcept { return schedule_.total_steps(); }
    /// Steps this run will take in total, honoring max_steps.
    std::size_t planned_steps() const noexcept;
    std::size_t step() const noexcept { return step_; }
    bool done() const noexcept { return step_ >= planned_steps(); }

    const WarmupCosineSchedule& schedule() const noexcept { return schedule_; }
    Adam& optimizer() noexcept { return adam_; }
    model::Detector& model() noexcept { return model_; }
    const AssignedTargets& targets(std::size_t sample) const { return targets_.at(sample); }

    /// One optimizer update on the next batch. Throws NumericFault before touching
    /// parameters if the loss or a gradient is non-finite.
    StepRecord train_step();
    /// Repositions the step counter, e.g. after restoring a checkpoint.
    void seek(std::size_t step);

private:
    std::vector<std::size_t> epoch_order(std::size_t epoch) const;

    model::Detector& model_;
    TrainConfig cfg_;
    LossConfig loss_cfg_;
    std::vector<TrainSample> samples_;
    std::vector<AssignedTargets> targets_;
    std::size_t steps_per_epoch_;
    WarmupCosineSchedule schedule_;
    Adam adam_;
    std::size_t step_ = 0;
};

}  // namespace tagdet::train
