// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagdet/autodiff/tensor.hpp"

namespace tagdet::ad {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
class Var {
public:
    Var() = default;

    Graph& graph() const { return *graph_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return graph_ != nullptr; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }

private:
    friend class Graph;
    Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

/// What a backward rule sees. `in_grads[i]` is null when input i needs no gradient.
struct BackwardContext {
    const Tensor& out_value;
    const Tensor& out_grad;
    std::span<const Tensor* const> in_values;
    std::span<Tensor* const> in_grads;
};

using BackwardRule = std::function<void(const BackwardContext&)>;

/// Tape of op nodes in creation order, which is a topological order.
/// Single owner; build one graph per video when working in parallel.
class Graph {
public:
    explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Leaf that never receives a gradient.
    Var constant(Tensor value);
    /// Leaf whose gradient can be read back with grad() after backward().
    Var input(Tensor value);
    /// Leaf bound to a parameter; backward() adds into `p.grad`.
    Var param(Parameter& p);

    /// Appends an op node. `rule` is dropped when no input requires a gradient.
    Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardRule rule);

    /// Reverse sweep from a scalar. Node gradients are recomputed on every call;
    /// parameter gradients accumulate.
    void backward(Var loss);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;
    bool requires_grad(Var v) const;
    bool grad_enabled() const noexcept { return grad_enabled_; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        std::string op;
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardRule rule;
        Parameter* param = nullptr;
        bool requires_grad = false;
    };

    Var push_leaf(std::string_view op, Tensor value, bool requires_grad, Parameter* param);
    const Node& node(Var v) const;

    std::vector<Node> nodes_;
    bool grad_enabled_;
};

}  // namespace tagdet::ad
