// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tagdet/autodiff/graph.hpp"

namespace tagdet::ad {

// Elementwise, identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var maximum(Var a, Var b);

// The only two broadcasts: a 1xD row over time, and a Tx1 per-instant scalar over channels.
Var add_row(Var x, Var row);
Var mul_col(Var x, Var col);

Var scale(Var x, double s);
Var add_scalar(Var x, double c);

Var sigmoid(Var x);
Var relu(Var x);

/// Max-subtracted softmax of a rank-2 tensor along `axis` (0 or 1).
Var softmax(Var x, std::size_t axis);
/// Row-wise sum_b b * softmax(x)_b for R x B logits, R x 1, kept within [0, B-1].
Var bin_expectation(Var logits);

Var matmul(Var a, Var b);
/// x (TxIn) * w (InxOut) + b (1xOut).
Var linear(Var x, Var w, Var b);

/// Temporal convolution with zero same-padding.
/// x: T x Cin, w: K x Cin x Cout (K odd), b: 1 x Cout. Output length ceil(T/stride).
Var conv1d(Var x, Var w, Var b, std::size_t stride = 1);

/// Mean over the temporal axis, T x D -> 1 x D.
Var mean_time(Var x);
/// Temporal max pooling, kernel 2, stride 2, ceil mode.
Var max_pool_time(Var x);

Var concat_cols(Var a, Var b);

/// Per-row normalization over channels; gain and bias are 1 x D.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// out.flat[i] = x.flat[src[i]]. Backward scatter-adds.
Var gather(Var x, std::vector<std::size_t> src, Shape out_shape);
Var gather_rows(Var x, std::span<const std::size_t> rows);
Var slice_cols(Var x, std::size_t begin, std::size_t end);

/// Per-row dot product, T x D . T x D -> T x 1.
Var row_dot(Var a, Var b);

Var sum(Var x);

/// Sum over rows t and classes c of w_t * FL(logits[t,c], targets[t,c]) with
/// FL = -alpha_t (1 - p_t)^gamma log p_t over independent sigmoids.
Var sigmoid_focal_loss(Var logits, const Tensor& targets, std::span<const double> row_weights, double alpha,
                       double gamma);

enum class IouVariant { Plain, Generalized };

/// pred and target are T x 2 (distance to start, distance to end) around a shared
/// anchor. Returns sum_t w_t * (1 - IoU_t), or 1 - GIoU_t for the generalized variant.
Var iou_loss(Var pred, const Tensor& target, std::span<const double> row_weights, IouVariant variant);

}  // namespace tagdet::ad
