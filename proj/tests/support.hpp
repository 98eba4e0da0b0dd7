// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

// Shared helpers for the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "tagdet/autodiff/graph.hpp"
#include "tagdet/autodiff/ops.hpp"

namespace tagdet::testing {

/// Small deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed * 0x9e3779b97f4a7c15ULL + 1) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53);
    }
    std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
        return lo + static_cast<std::size_t>(eng_() % (hi - lo + 1));
    }
    bool coin() { return (eng_() & 1) != 0; }

    ad::Tensor tensor(ad::Shape shape, double lo = -1.0, double hi = 1.0) {
        ad::Tensor t(std::move(shape));
        for (double& v : t.values()) v = uniform(lo, hi);
        return t;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Builds a graph from leaf Vars; the result may have any shape.
using GraphFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Compares reverse-mode gradients with central differences of a random
/// projection of the output. The error of one entry is |a - n| / max(|a|, |n|, floor);
/// the floor keeps near-zero gradients from reading as large relative errors.
inline GradCheck check_gradients(const GraphFn& fn, const std::vector<ad::Tensor>& inputs, std::uint64_t seed,
                                 double h = 1e-5, double floor = 1e-2) {
    auto project = [&](ad::Graph& g, const std::vector<ad::Var>& leaves, const ad::Tensor* weights) {
        ad::Var out = fn(g, leaves);
        return weights ? ad::sum(ad::mul(out, g.constant(*weights))) : out;
    };

    // Fixed random projection so every output entry contributes.
    ad::Tensor weights;
    {
        ad::Graph g(false);
        std::vector<ad::Var> leaves;
        for (const auto& t : inputs) leaves.push_back(g.constant(t));
        Gen gen(seed);
        weights = gen.tensor(fn(g, leaves).shape(), 0.5, 1.5);
    }

    ad::Graph g;
    std::vector<ad::Var> leaves;
    for (const auto& t : inputs) leaves.push_back(g.input(t));
    g.backward(project(g, leaves, &weights));

    auto eval_at = [&](const std::vector<ad::Tensor>& xs) {
        ad::Graph ng(false);
        std::vector<ad::Var> l;
        for (const auto& t : xs) l.push_back(ng.constant(t));
        return project(ng, l, &weights).value().item();
    };

    GradCheck result;
    std::vector<ad::Tensor> xs = inputs;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const ad::Tensor analytic = g.grad(leaves[k]);
        for (std::size_t i = 0; i < xs[k].numel(); ++i) {
            const double orig = xs[k][i];
            xs[k][i] = orig + h;
            const double up = eval_at(xs);
            xs[k][i] = orig - h;
            const double down = eval_at(xs);
            xs[k][i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic.empty() ? 0.0 : analytic[i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            result.max_rel_error = std::max(result.max_rel_error, err);
            ++result.checked;
        }
    }
    return result;
}

/// Same comparison as check_gradients, for model parameters: `fn` reads the
/// parameters through Graph::param and its output is projected to a scalar.
inline GradCheck check_param_gradients(const std::function<ad::Var(ad::Graph&)>& fn,
                                       const std::vector<ad::Parameter*>& params, std::uint64_t seed,
                                       double h = 1e-5, double floor = 1e-2) {
    ad::Tensor weights;
    {
        ad::Graph g(false);
        Gen gen(seed);
        weights = gen.tensor(fn(g).shape(), 0.5, 1.5);
    }
    auto scalar = [&](ad::Graph& g) { return ad::sum(ad::mul(fn(g), g.constant(weights))); };

    for (ad::Parameter* p : params) p->zero_grad();
    {
        ad::Graph g;
        g.backward(scalar(g));
    }
    GradCheck result;
    for (ad::Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            ad::Graph up_g(false);
            const double up = scalar(up_g).value().item();
            p->value[i] = orig - h;
            ad::Graph down_g(false);
            const double down = scalar(down_g).value().item();
            p->value[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double a = p->grad[i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            result.max_rel_error = std::max(result.max_rel_error, err);
            ++result.checked;
        }
    }
    return result;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("tagdet-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace tagdet::testing
