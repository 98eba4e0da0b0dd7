// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "tagdet/autodiff/graph.hpp"
#include "tagdet/model/init.hpp"

namespace tagdet::model {

/// How the two convolution responses of the local branch are fused.
enum class FusionMode { Gating, Average, Maximum, Baseline };

std::string_view to_string(FusionMode mode);
FusionMode parse_fusion_mode(std::string_view name);

/// Nearest odd integer to `v` (ties go up).
std::size_t round_to_odd(double v);

struct TagConfig {
    std::size_t dim = 32;
    std::size_t window = 3;           // w
    double scale = 3.0;               // k; the large window is round_to_odd(k * w)
    std::size_t baseline_window = 3;  // w', Baseline fusion only
    std::size_t gate_hidden = 0;      // 0 means `dim`
    FusionMode fusion = FusionMode::Gating;
    bool use_context = true;
    bool use_gating = true;

    std::size_t large_window() const { return round_to_odd(scale * static_cast<double>(window)); }
    /// Offset of the boundary frames used as keys/values: half the large window.
    std::size_t context_radius() const { return large_window() / 2; }
    std::size_t hidden() const { return gate_hidden == 0 ? dim : gate_hidden; }
    /// "Without gating" falls back to the Baseline fusion.
    FusionMode effective_fusion() const { return use_gating ? fusion : FusionMode::Baseline; }
    void validate() const;
};

/// All learnable tensors of one layer. Convolutions are K x D x D with 1 x D
/// biases; affine maps are In x Out with 1 x Out biases.
struct TagLayerParams {
    ad::Parameter conv_w_weight, conv_w_bias;
    ad::Parameter conv_kw_weight, conv_kw_bias;
    ad::Parameter gate_hidden_weight, gate_hidden_bias;  // 2D -> H
    ad::Parameter gate_out_weight, gate_out_bias;        // H -> 1
    ad::Parameter attn_q_weight, attn_q_bias;
    ad::Parameter attn_k_weight, attn_k_bias;
    ad::Parameter attn_v_weight, attn_v_bias;
    ad::Parameter attn_out_weight, attn_out_bias;
    ad::Parameter instant_fc_weight, instant_fc_bias;
    ad::Parameter baseline_conv_weight, baseline_conv_bias;

    void set_zero();
    ParameterList list();
};

/// TAG(x) = context(x) + convolution(x) + instant(x) + x over a T x D sequence.
class TagLayer {
public:
    TagLayer(const std::string& prefix, const TagConfig& cfg, const ParamInit& init);

    ad::Var forward(ad::Graph& g, ad::Var x);

    /// ReLU(FC(mean_t x)), 1 x D; added to every instant.
    ad::Var instant_branch(ad::Graph& g, ad::Var x);
    /// Per-instant gate in (0,1), T x 1.
    ad::Var gate(ad::Graph& g, ad::Var x);
    ad::Var convolution_branch(ad::Graph& g, ad::Var x, FusionMode mode);
    /// Single-head cross-attention: the instant queries the two frames at +-radius.
    ad::Var context_branch(ad::Graph& g, ad::Var x);

    ad::Var conv_small(ad::Graph& g, ad::Var x);
    ad::Var conv_large(ad::Graph& g, ad::Var x);

    TagLayerParams& params() noexcept { return params_; }
    const TagConfig& config() const noexcept { return cfg_; }
    ParameterList parameters() { return params_.list(); }

private:
    ad::Var gate_from(ad::Graph& g, ad::Var small, ad::Var large);

    TagConfig cfg_;
    TagLayerParams params_;
};

}  // namespace tagdet::model
