// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/autodiff/graph.hpp"

#include "tagdet/errors.hpp"

namespace tagdet::ad {

const Tensor& Var::value() const {
    if (!graph_) throw std::logic_error("Var: use of unbound handle");
    return graph_->value(*this);
}

Var Graph::push_leaf(std::string_view op, Tensor value, bool requires_grad, Parameter* param) {
    if (!value.all_finite()) throw NumericFault(std::string(op) + ": non-finite leaf value");
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.requires_grad = requires_grad && grad_enabled_;
    n.param = n.requires_grad ? param : nullptr;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) { return push_leaf("constant", std::move(value), false, nullptr); }

Var Graph::input(Tensor value) { return push_leaf("input", std::move(value), true, nullptr); }

Var Graph::param(Parameter& p) { return push_leaf("param:" + p.name, p.value, true, &p); }

Var Graph::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardRule rule) {
    if (!value.all_finite()) throw NumericFault(std::string(op) + ": non-finite output");
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.inputs.reserve(inputs.size());
    for (const Var& v : inputs) {
        if (v.graph_ != this) throw std::logic_error(std::string(op) + ": operand belongs to another graph");
        n.inputs.push_back(v.id_);
        n.requires_grad = n.requires_grad || nodes_[v.id_].requires_grad;
    }
    if (n.requires_grad) n.rule = std::move(rule);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

void Graph::backward(Var loss) {
    if (loss.graph_ != this) throw std::logic_error("backward: loss belongs to another graph");
    Node& root = nodes_[loss.id_];
    if (root.value.numel() != 1)
        throw ShapeError("backward: loss must be scalar, got " + shape_str(root.value.shape()));
    if (!root.requires_grad) return;

    for (std::size_t i = 0; i <= loss.id_; ++i) {
        Node& n = nodes_[i];
        if (!n.requires_grad) continue;
        if (n.grad.shape() != n.value.shape())
            n.grad = Tensor(n.value.shape());
        else
            n.grad.fill(0.0);
    }
    root.grad.fill(1.0);

    std::vector<const Tensor*> in_values;
    std::vector<Tensor*> in_grads;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.rule) continue;
        in_values.clear();
        in_grads.clear();
        for (std::size_t in : n.inputs) {
            in_values.push_back(&nodes_[in].value);
            in_grads.push_back(nodes_[in].requires_grad ? &nodes_[in].grad : nullptr);
        }
        n.rule(BackwardContext{n.value, n.grad, in_values, in_grads});
    }

    for (std::size_t i = 0; i <= loss.id_; ++i) {
        Node& n = nodes_[i];
        if (!n.param) continue;
        if (n.param->grad.shape() != n.param->value.shape()) n.param->zero_grad();
        n.param->grad += n.grad;
    }
}

const Graph::Node& Graph::node(Var v) const {
    if (v.graph_ != this || v.id_ >= nodes_.size()) throw std::logic_error("graph: foreign or stale handle");
    return nodes_[v.id_];
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

const Tensor& Graph::grad(Var v) const {
    const Node& n = node(v);
    if (!n.requires_grad || n.grad.empty()) throw std::logic_error("graph: no gradient recorded for " + n.op);
    return n.grad;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

}  // namespace tagdet::ad
