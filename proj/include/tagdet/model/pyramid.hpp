// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "tagdet/autodiff/graph.hpp"
#include "tagdet/model/tag_layer.hpp"

namespace tagdet::model {

struct PyramidConfig {
    std::size_t input_dim = 16;
    std::size_t levels = 5;
    std::size_t embed_kernel = 3;
    TagConfig tag;  // tag.dim is the model width

    void validate() const;
};

struct PyramidOutput {
    std::vector<ad::Var> levels;       // level l: ceil(T / 2^l) x D, l = 0..L-1
    std::vector<std::size_t> strides;  // 2^l, in input-instant units
};

/// ceil-halving cascade of temporal lengths.
std::vector<std::size_t> pyramid_lengths(std::size_t length, std::size_t levels);

class PyramidBackbone {
public:
    PyramidBackbone(const PyramidConfig& cfg, const ParamInit& init);

    /// conv -> ReLU -> layer norm, T x D_in -> T x D.
    ad::Var embed(ad::Graph& g, ad::Var x);
    /// Level 0 = TAG(embed(x)); level l+1 = TAG(maxpool(level l)).
    PyramidOutput forward(ad::Graph& g, ad::Var x);

    const PyramidConfig& config() const noexcept { return cfg_; }
    std::vector<TagLayer>& layers() noexcept { return layers_; }
    ParameterList parameters();

    ad::Parameter embed_weight, embed_bias, embed_norm_gain, embed_norm_bias;

private:
    PyramidConfig cfg_;
    std::vector<TagLayer> layers_;
};

}  // namespace tagdet::model
