// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "tagdet/model/init.hpp"

namespace tagdet::train {

/// Linear warmup from 0 to `base_lr` over `warmup_steps`, then cosine decay to 0
/// at `total_steps`.
class WarmupCosineSchedule {
public:
    WarmupCosineSchedule(double base_lr, std::size_t warmup_steps, std::size_t total_steps);

    double at(std::size_t step) const;

    double base_lr() const noexcept { return base_lr_; }
    std::size_t warmup_steps() const noexcept { return warmup_; }
    std::size_t total_steps() const noexcept { return total_; }

private:
    double base_lr_;
    std::size_t warmup_;
    std::size_t total_;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
};

class Adam {
public:
    Adam(model::ParameterList params, AdamConfig cfg);

    /// Applies one update from the accumulated gradients. Throws NumericFault,
    /// leaving everything untouched, if any gradient is non-finite.
    void step(double lr);
    void zero_grad();

    std::size_t steps() const noexcept { return steps_; }
    const model::ParameterList& params() const noexcept { return params_; }
    std::vector<ad::Tensor>& first_moments() noexcept { return m_; }
    std::vector<ad::Tensor>& second_moments() noexcept { return v_; }
    const std::vector<ad::Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<ad::Tensor>& second_moments() const noexcept { return v_; }
    void set_steps(std::size_t s) noexcept { steps_ = s; }

private:
    model::ParameterList params_;
    AdamConfig cfg_;
    std::vector<ad::Tensor> m_, v_;
    std::size_t steps_ = 0;
};

}  // namespace tagdet::train
