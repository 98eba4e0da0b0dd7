// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tagdet/errors.hpp"

namespace tagdet::ad {
namespace {

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
    throw ShapeError(std::string(op) + ": " + detail);
}

void require_same(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) shape_fail(op, "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void require_rank2(const char* op, const Var& x) {
    if (x.shape().size() != 2) shape_fail(op, "expected rank-2 operand, got " + shape_str(x.shape()));
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Var add(Var a, Var b) {
    require_same("add", a, b);
    Tensor out = a.value();
    out += b.value();
    return a.graph().record("add", std::move(out), {a, b}, [](const BackwardContext& c) {
        if (c.in_grads[0]) *c.in_grads[0] += c.out_grad;
        if (c.in_grads[1]) *c.in_grads[1] += c.out_grad;
    });
}

Var sub(Var a, Var b) {
    require_same("sub", a, b);
    Tensor out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
    return a.graph().record("sub", std::move(out), {a, b}, [](const BackwardContext& c) {
        if (c.in_grads[0]) *c.in_grads[0] += c.out_grad;
        if (Tensor* g = c.in_grads[1])
            for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] -= c.out_grad[i];
    });
}

Var mul(Var a, Var b) {
    require_same("mul", a, b);
    Tensor out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
    return a.graph().record("mul", std::move(out), {a, b}, [](const BackwardContext& c) {
        const Tensor& av = *c.in_values[0];
        const Tensor& bv = *c.in_values[1];
        if (Tensor* g = c.in_grads[0])
            for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += c.out_grad[i] * bv[i];
        if (Tensor* g = c.in_grads[1])
            for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += c.out_grad[i] * av[i];
    });
}

Var maximum(Var a, Var b) {
    require_same("maximum", a, b);
    Tensor out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], bv[i]);
    return a.graph().record("maximum", std::move(out), {a, b}, [](const BackwardContext& c) {
        const Tensor& av = *c.in_values[0];
        const Tensor& bv = *c.in_values[1];
        for (std::size_t i = 0; i < av.numel(); ++i) {
            // ties route to the first operand
            Tensor* g = av[i] >= bv[i] ? c.in_grads[0] : c.in_grads[1];
            if (g) (*g)[i] += c.out_grad[i];
        }
    });
}

Var add_row(Var x, Var row) {
    require_rank2("add_row", x);
    require_rank2("add_row", row);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    if (row.shape()[0] != 1 || row.shape()[1] != D)
        shape_fail("add_row", "row " + shape_str(row.shape()) + " does not broadcast over " + shape_str(x.shape()));
    Tensor out = x.value();
    const Tensor& r = row.value();
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) out.at(t, d) += r[d];
    return x.graph().record("add_row", std::move(out), {x, row}, [T, D](const BackwardContext& c) {
        if (c.in_grads[0]) *c.in_grads[0] += c.out_grad;
        if (Tensor* g = c.in_grads[1])
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t d = 0; d < D; ++d) (*g)[d] += c.out_grad.at(t, d);
    });
}

Var mul_col(Var x, Var col) {
    require_rank2("mul_col", x);
    require_rank2("mul_col", col);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    if (col.shape()[0] != T || col.shape()[1] != 1)
        shape_fail("mul_col", "column " + shape_str(col.shape()) + " does not broadcast over " + shape_str(x.shape()));
    Tensor out = x.value();
    const Tensor& cv = col.value();
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) out.at(t, d) *= cv[t];
    return x.graph().record("mul_col", std::move(out), {x, col}, [T, D](const BackwardContext& c) {
        const Tensor& xv = *c.in_values[0];
        const Tensor& cv = *c.in_values[1];
        if (Tensor* g = c.in_grads[0])
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t d = 0; d < D; ++d) g->at(t, d) += c.out_grad.at(t, d) * cv[t];
        if (Tensor* g = c.in_grads[1])
            for (std::size_t t = 0; t < T; ++t) {
                double acc = 0.0;
                for (std::size_t d = 0; d < D; ++d) acc += c.out_grad.at(t, d) * xv.at(t, d);
                (*g)[t] += acc;
            }
    });
}

Var scale(Var x, double s) {
    Tensor out = x.value();
    for (auto& v : out.values()) v *= s;
    return x.graph().record("scale", std::move(out), {x}, [s](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += s * c.out_grad[i];
    });
}

Var add_scalar(Var x, double k) {
    Tensor out = x.value();
    for (auto& v : out.values()) v += k;
    return x.graph().record("add_scalar", std::move(out), {x},
                            [](const BackwardContext& c) { *c.in_grads[0] += c.out_grad; });
}

Var sigmoid(Var x) {
    Tensor out = x.value();
    for (auto& v : out.values()) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    return x.graph().record("sigmoid", std::move(out), {x}, [](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double y = c.out_value[i];
            g[i] += c.out_grad[i] * y * (1.0 - y);
        }
    });
}

Var relu(Var x) {
    Tensor out = x.value();
    for (auto& v : out.values()) v = std::max(v, 0.0);
    return x.graph().record("relu", std::move(out), {x}, [](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        const Tensor& xv = *c.in_values[0];
        for (std::size_t i = 0; i < g.numel(); ++i)
            if (xv[i] > 0) g[i] += c.out_grad[i];
    });
}

Var softmax(Var x, std::size_t axis) {
    require_rank2("softmax", x);
    if (axis > 1) shape_fail("softmax", "axis " + std::to_string(axis) + " out of range for rank 2");
    const std::size_t R = x.shape()[0], C = x.shape()[1];
    // Walk lines along `axis`: `lines` independent vectors of `len` elements spaced by `step`.
    const std::size_t lines = axis == 1 ? R : C;
    const std::size_t len = axis == 1 ? C : R;
    const std::size_t step = axis == 1 ? 1 : C;
    const std::size_t line_step = axis == 1 ? C : 1;

    Tensor out = x.value();
    for (std::size_t l = 0; l < lines; ++l) {
        double* p = out.data() + l * line_step;
        double mx = p[0];
        for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, p[i * step]);
        double z = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            p[i * step] = std::exp(p[i * step] - mx);
            z += p[i * step];
        }
        for (std::size_t i = 0; i < len; ++i) p[i * step] /= z;
    }
    return x.graph().record("softmax", std::move(out), {x}, [=](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        for (std::size_t l = 0; l < lines; ++l) {
            const std::size_t base = l * line_step;
            double dot = 0.0;
            for (std::size_t i = 0; i < len; ++i) dot += c.out_grad[base + i * step] * c.out_value[base + i * step];
            for (std::size_t i = 0; i < len; ++i) {
                const std::size_t k = base + i * step;
                g[k] += c.out_value[k] * (c.out_grad[k] - dot);
            }
        }
    });
}

Var bin_expectation(Var logits) {
    require_rank2("bin_expectation", logits);
    const std::size_t R = logits.shape()[0], B = logits.shape()[1];
    Tensor probs = logits.value();
    Tensor out({R, 1});
    for (std::size_t r = 0; r < R; ++r) {
        double* p = probs.data() + r * B;
        const double mx = *std::max_element(p, p + B);
        double z = 0.0;
        for (std::size_t b = 0; b < B; ++b) z += (p[b] = std::exp(p[b] - mx));
        double e = 0.0;
        for (std::size_t b = 0; b < B; ++b) e += static_cast<double>(b) * (p[b] /= z);
        // Rounding can push a saturated expectation an ulp past the last bin.
        out[r] = std::clamp(e, 0.0, static_cast<double>(B - 1));
    }
    return logits.graph().record("bin_expectation", std::move(out), {logits},
                                 [R, B, probs = std::move(probs)](const BackwardContext& c) {
                                     Tensor& g = *c.in_grads[0];
                                     for (std::size_t r = 0; r < R; ++r) {
                                         const double* p = probs.data() + r * B;
                                         double e = 0.0;
                                         for (std::size_t b = 0; b < B; ++b) e += static_cast<double>(b) * p[b];
                                         for (std::size_t b = 0; b < B; ++b)
                                             g[r * B + b] += c.out_grad[r] * p[b] * (static_cast<double>(b) - e);
                                     }
                                 });
}

Var matmul(Var a, Var b) {
    require_rank2("matmul", a);
    require_rank2("matmul", b);
    const std::size_t M = a.shape()[0], K = a.shape()[1], N = b.shape()[1];
    if (b.shape()[0] != K)
        shape_fail("matmul", "inner dims differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    Tensor out({M, N});
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const double aik = av.at(i, k);
            const double* brow = bv.data() + k * N;
            double* orow = out.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) orow[j] += aik * brow[j];
        }
    return a.graph().record("matmul", std::move(out), {a, b}, [M, K, N](const BackwardContext& c) {
        const Tensor& av = *c.in_values[0];
        const Tensor& bv = *c.in_values[1];
        if (Tensor* ga = c.in_grads[0])
            for (std::size_t i = 0; i < M; ++i)
                for (std::size_t k = 0; k < K; ++k) {
                    const double* brow = bv.data() + k * N;
                    const double* grow = c.out_grad.data() + i * N;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < N; ++j) acc += grow[j] * brow[j];
                    ga->at(i, k) += acc;
                }
        if (Tensor* gb = c.in_grads[1])
            for (std::size_t i = 0; i < M; ++i)
                for (std::size_t k = 0; k < K; ++k) {
                    const double aik = av.at(i, k);
                    const double* grow = c.out_grad.data() + i * N;
                    double* gbrow = gb->data() + k * N;
                    for (std::size_t j = 0; j < N; ++j) gbrow[j] += aik * grow[j];
                }
    });
}

Var linear(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

Var conv1d(Var x, Var w, Var b, std::size_t stride) {
    require_rank2("conv1d", x);
    if (w.shape().size() != 3) shape_fail("conv1d", "weight must be K x Cin x Cout, got " + shape_str(w.shape()));
    const std::size_t T = x.shape()[0], Cin = x.shape()[1];
    const std::size_t K = w.shape()[0], Cout = w.shape()[2];
    if (w.shape()[1] != Cin)
        shape_fail("conv1d", "weight input channels " + std::to_string(w.shape()[1]) + " vs input " +
                                 std::to_string(Cin));
    if (K % 2 == 0) shape_fail("conv1d", "kernel length " + std::to_string(K) + " is even");
    if (b.shape() != Shape{1, Cout}) shape_fail("conv1d", "bias must be 1x" + std::to_string(Cout));
    if (stride == 0) shape_fail("conv1d", "stride must be positive");
    const std::size_t To = (T + stride - 1) / stride;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(K / 2);

    Tensor out({To, Cout});
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    for (std::size_t o = 0; o < To; ++o) {
        double* orow = out.data() + o * Cout;
        for (std::size_t co = 0; co < Cout; ++co) orow[co] = bv[co];
        for (std::size_t k = 0; k < K; ++k) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(o * stride + k) - pad;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
            const double* xrow = xv.data() + src * Cin;
            for (std::size_t ci = 0; ci < Cin; ++ci) {
                const double xval = xrow[ci];
                const double* wrow = wv.data() + (k * Cin + ci) * Cout;
                for (std::size_t co = 0; co < Cout; ++co) orow[co] += xval * wrow[co];
            }
        }
    }
    return x.graph().record("conv1d", std::move(out), {x, w, b}, [=](const BackwardContext& c) {
        const Tensor& xv = *c.in_values[0];
        const Tensor& wv = *c.in_values[1];
        Tensor* gx = c.in_grads[0];
        Tensor* gw = c.in_grads[1];
        Tensor* gb = c.in_grads[2];
        for (std::size_t o = 0; o < To; ++o) {
            const double* grow = c.out_grad.data() + o * Cout;
            if (gb)
                for (std::size_t co = 0; co < Cout; ++co) (*gb)[co] += grow[co];
            for (std::size_t k = 0; k < K; ++k) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(o * stride + k) - pad;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
                for (std::size_t ci = 0; ci < Cin; ++ci) {
                    const std::size_t widx = (k * Cin + ci) * Cout;
                    if (gx) {
                        const double* wrow = wv.data() + widx;
                        double acc = 0.0;
                        for (std::size_t co = 0; co < Cout; ++co) acc += grow[co] * wrow[co];
                        (*gx)[src * Cin + ci] += acc;
                    }
                    if (gw) {
                        const double xval = xv[src * Cin + ci];
                        double* gwrow = gw->data() + widx;
                        for (std::size_t co = 0; co < Cout; ++co) gwrow[co] += xval * grow[co];
                    }
                }
            }
        }
    });
}

Var mean_time(Var x) {
    require_rank2("mean_time", x);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    Tensor out({1, D});
    const Tensor& xv = x.value();
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) out[d] += xv.at(t, d);
    for (auto& v : out.values()) v /= static_cast<double>(T);
    return x.graph().record("mean_time", std::move(out), {x}, [T, D](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        const double inv = 1.0 / static_cast<double>(T);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t d = 0; d < D; ++d) g.at(t, d) += c.out_grad[d] * inv;
    });
}

Var max_pool_time(Var x) {
    require_rank2("max_pool_time", x);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    const std::size_t To = (T + 1) / 2;
    Tensor out({To, D});
    std::vector<std::size_t> argmax(To * D);
    const Tensor& xv = x.value();
    for (std::size_t o = 0; o < To; ++o)
        for (std::size_t d = 0; d < D; ++d) {
            std::size_t best = 2 * o;
            if (2 * o + 1 < T && xv.at(2 * o + 1, d) > xv.at(best, d)) best = 2 * o + 1;
            out.at(o, d) = xv.at(best, d);
            argmax[o * D + d] = best * D + d;
        }
    return x.graph().record("max_pool_time", std::move(out), {x},
                            [argmax = std::move(argmax)](const BackwardContext& c) {
                                Tensor& g = *c.in_grads[0];
                                for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += c.out_grad[i];
                            });
}

Var concat_cols(Var a, Var b) {
    require_rank2("concat_cols", a);
    require_rank2("concat_cols", b);
    const std::size_t T = a.shape()[0], Da = a.shape()[1], Db = b.shape()[1];
    if (b.shape()[0] != T)
        shape_fail("concat_cols", "row counts differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor out({T, Da + Db});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t d = 0; d < Da; ++d) out.at(t, d) = a.value().at(t, d);
        for (std::size_t d = 0; d < Db; ++d) out.at(t, Da + d) = b.value().at(t, d);
    }
    return a.graph().record("concat_cols", std::move(out), {a, b}, [T, Da, Db](const BackwardContext& c) {
        for (std::size_t t = 0; t < T; ++t) {
            if (Tensor* g = c.in_grads[0])
                for (std::size_t d = 0; d < Da; ++d) g->at(t, d) += c.out_grad.at(t, d);
            if (Tensor* g = c.in_grads[1])
                for (std::size_t d = 0; d < Db; ++d) g->at(t, d) += c.out_grad.at(t, Da + d);
        }
    });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
    require_rank2("layer_norm", x);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    if (gain.shape() != Shape{1, D} || bias.shape() != Shape{1, D})
        shape_fail("layer_norm", "gain/bias must be 1x" + std::to_string(D));
    Tensor out({T, D});
    Tensor xhat({T, D});
    std::vector<double> inv_std(T);
    const Tensor& xv = x.value();
    const Tensor& gv = gain.value();
    const Tensor& bv = bias.value();
    for (std::size_t t = 0; t < T; ++t) {
        double mu = 0.0;
        for (std::size_t d = 0; d < D; ++d) mu += xv.at(t, d);
        mu /= static_cast<double>(D);
        double var = 0.0;
        for (std::size_t d = 0; d < D; ++d) var += (xv.at(t, d) - mu) * (xv.at(t, d) - mu);
        var /= static_cast<double>(D);
        inv_std[t] = 1.0 / std::sqrt(var + eps);
        for (std::size_t d = 0; d < D; ++d) {
            xhat.at(t, d) = (xv.at(t, d) - mu) * inv_std[t];
            out.at(t, d) = xhat.at(t, d) * gv[d] + bv[d];
        }
    }
    return x.graph().record(
        "layer_norm", std::move(out), {x, gain, bias},
        [T, D, xhat = std::move(xhat), inv_std = std::move(inv_std)](const BackwardContext& c) {
            const Tensor& gv = *c.in_values[1];
            for (std::size_t t = 0; t < T; ++t) {
                if (Tensor* gx = c.in_grads[0]) {
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (std::size_t d = 0; d < D; ++d) {
                        const double dxh = c.out_grad.at(t, d) * gv[d];
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xhat.at(t, d);
                    }
                    const double n = static_cast<double>(D);
                    for (std::size_t d = 0; d < D; ++d) {
                        const double dxh = c.out_grad.at(t, d) * gv[d];
                        gx->at(t, d) += inv_std[t] / n * (n * dxh - sum_dxhat - xhat.at(t, d) * sum_dxhat_xhat);
                    }
                }
                if (Tensor* gg = c.in_grads[1])
                    for (std::size_t d = 0; d < D; ++d) (*gg)[d] += c.out_grad.at(t, d) * xhat.at(t, d);
                if (Tensor* gb = c.in_grads[2])
                    for (std::size_t d = 0; d < D; ++d) (*gb)[d] += c.out_grad.at(t, d);
            }
        });
}

Var gather(Var x, std::vector<std::size_t> src, Shape out_shape) {
    if (shape_numel(out_shape) != src.size())
        shape_fail("gather", std::to_string(src.size()) + " indices for output " + shape_str(out_shape));
    const std::size_t n = x.value().numel();
    Tensor out(std::move(out_shape));
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] >= n) shape_fail("gather", "index " + std::to_string(src[i]) + " out of range " + std::to_string(n));
        out[i] = x.value()[src[i]];
    }
    return x.graph().record("gather", std::move(out), {x}, [src = std::move(src)](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        for (std::size_t i = 0; i < src.size(); ++i) g[src[i]] += c.out_grad[i];
    });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
    require_rank2("gather_rows", x);
    const std::size_t D = x.shape()[1];
    std::vector<std::size_t> src;
    src.reserve(rows.size() * D);
    for (std::size_t r : rows) {
        if (r >= x.shape()[0]) shape_fail("gather_rows", "row " + std::to_string(r) + " out of range");
        for (std::size_t d = 0; d < D; ++d) src.push_back(r * D + d);
    }
    return gather(x, std::move(src), {rows.size(), D});
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
    require_rank2("slice_cols", x);
    const std::size_t T = x.shape()[0], D = x.shape()[1];
    if (begin >= end || end > D)
        shape_fail("slice_cols", "columns [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                                     shape_str(x.shape()));
    std::vector<std::size_t> src;
    src.reserve(T * (end - begin));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = begin; d < end; ++d) src.push_back(t * D + d);
    return gather(x, std::move(src), {T, end - begin});
}

Var row_dot(Var a, Var b) {
    require_rank2("row_dot", a);
    require_same("row_dot", a, b);
    const std::size_t T = a.shape()[0], D = a.shape()[1];
    Tensor out({T, 1});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) out[t] += a.value().at(t, d) * b.value().at(t, d);
    return a.graph().record("row_dot", std::move(out), {a, b}, [T, D](const BackwardContext& c) {
        const Tensor& av = *c.in_values[0];
        const Tensor& bv = *c.in_values[1];
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t d = 0; d < D; ++d) {
                if (c.in_grads[0]) c.in_grads[0]->at(t, d) += c.out_grad[t] * bv.at(t, d);
                if (c.in_grads[1]) c.in_grads[1]->at(t, d) += c.out_grad[t] * av.at(t, d);
            }
    });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().values()) s += v;
    return x.graph().record("sum", Tensor::scalar(s), {x}, [](const BackwardContext& c) {
        Tensor& g = *c.in_grads[0];
        const double go = c.out_grad[0];
        for (auto& v : g.values()) v += go;
    });
}

Var sigmoid_focal_loss(Var logits, const Tensor& targets, std::span<const double> row_weights, double alpha,
                       double gamma) {
    require_rank2("sigmoid_focal_loss", logits);
    if (targets.shape() != logits.shape())
        shape_fail("sigmoid_focal_loss",
                   "targets " + shape_str(targets.shape()) + " vs logits " + shape_str(logits.shape()));
    const std::size_t T = logits.shape()[0], C = logits.shape()[1];
    if (row_weights.size() != T)
        shape_fail("sigmoid_focal_loss", std::to_string(row_weights.size()) + " row weights for " + std::to_string(T) +
                                             " rows");

    // Per-element d(loss)/d(logit), kept for backward.
    std::vector<double> dlogit(T * C);
    double total = 0.0;
    const Tensor& z = logits.value();
    for (std::size_t t = 0; t < T; ++t) {
        const double w = row_weights[t];
        for (std::size_t k = 0; k < C; ++k) {
            const std::size_t i = t * C + k;
            const double zi = z[i];
            const double p = zi >= 0 ? 1.0 / (1.0 + std::exp(-zi)) : std::exp(zi) / (1.0 + std::exp(zi));
            if (targets[i] >= 0.5) {
                const double log_p = -softplus(-zi);
                const double mod = std::pow(1.0 - p, gamma);
                total += w * -alpha * mod * log_p;
                dlogit[i] = w * alpha * mod * (gamma * p * log_p - (1.0 - p));
            } else {
                const double log_q = -softplus(zi);
                const double mod = std::pow(p, gamma);
                total += w * -(1.0 - alpha) * mod * log_q;
                dlogit[i] = w * (1.0 - alpha) * mod * (p - gamma * (1.0 - p) * log_q);
            }
        }
    }
    return logits.graph().record("sigmoid_focal_loss", Tensor::scalar(total), {logits},
                                 [dlogit = std::move(dlogit)](const BackwardContext& c) {
                                     Tensor& g = *c.in_grads[0];
                                     const double go = c.out_grad[0];
                                     for (std::size_t i = 0; i < dlogit.size(); ++i) g[i] += go * dlogit[i];
                                 });
}

Var iou_loss(Var pred, const Tensor& target, std::span<const double> row_weights, IouVariant variant) {
    require_rank2("iou_loss", pred);
    const std::size_t T = pred.shape()[0];
    if (pred.shape()[1] != 2 || target.shape() != pred.shape())
        shape_fail("iou_loss", "pred " + shape_str(pred.shape()) + " and target " + shape_str(target.shape()) +
                                   " must both be Tx2");
    if (row_weights.size() != T)
        shape_fail("iou_loss", std::to_string(row_weights.size()) + " row weights for " + std::to_string(T) + " rows");

    std::vector<double> dpred(T * 2, 0.0);
    double total = 0.0;
    const Tensor& pv = pred.value();
    for (std::size_t t = 0; t < T; ++t) {
        const double ps = pv.at(t, 0), pe = pv.at(t, 1);
        const double gs = target.at(t, 0), ge = target.at(t, 1);
        const double w = row_weights[t];
        // Segments are [-ps, pe] and [-gs, ge] around the anchor.
        const double raw_inter = std::min(pe, ge) + std::min(ps, gs);
        const bool overlap = raw_inter > 0.0;
        const double inter = overlap ? raw_inter : 0.0;
        const double uni = (ps + pe) + (gs + ge) - inter;
        if (uni <= 0.0) throw NumericFault("iou_loss: empty union");
        const double iou = inter / uni;
        // d(inter)/d(ps), d(inter)/d(pe)
        const double di_s = overlap && ps < gs ? 1.0 : 0.0;
        const double di_e = overlap && pe < ge ? 1.0 : 0.0;
        const double du_s = 1.0 - di_s, du_e = 1.0 - di_e;
        double d_s = (di_s * uni - inter * du_s) / (uni * uni);
        double d_e = (di_e * uni - inter * du_e) / (uni * uni);
        double quality = iou;
        if (variant == IouVariant::Generalized) {
            const double hull = std::max(pe, ge) + std::max(ps, gs);
            quality = iou - (hull - uni) / hull;
            // -(hull - uni)/hull = uni/hull - 1
            const double dh_s = ps > gs ? 1.0 : 0.0;
            const double dh_e = pe > ge ? 1.0 : 0.0;
            d_s += (du_s * hull - uni * dh_s) / (hull * hull);
            d_e += (du_e * hull - uni * dh_e) / (hull * hull);
        }
        total += w * (1.0 - quality);
        dpred[2 * t] = -w * d_s;
        dpred[2 * t + 1] = -w * d_e;
    }
    return pred.graph().record("iou_loss", Tensor::scalar(total), {pred},
                               [dpred = std::move(dpred)](const BackwardContext& c) {
                                   Tensor& g = *c.in_grads[0];
                                   const double go = c.out_grad[0];
                                   for (std::size_t i = 0; i < dpred.size(); ++i) g[i] += go * dpred[i];
                               });
}

}  // namespace tagdet::ad
