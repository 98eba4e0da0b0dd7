// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/model/pyramid.hpp"

#include "tagdet/autodiff/ops.hpp"
#include "tagdet/errors.hpp"

namespace tagdet::model {

void PyramidConfig::validate() const {
    if (levels == 0) throw ConfigError("pyramid: levels must be >= 1");
    if (input_dim == 0) throw ConfigError("pyramid: input dim must be positive");
    if (embed_kernel % 2 == 0) throw ConfigError("pyramid: embed kernel must be odd");
    tag.validate();
}

std::vector<std::size_t> pyramid_lengths(std::size_t length, std::size_t levels) {
    std::vector<std::size_t> out;
    out.reserve(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        out.push_back(length);
        length = (length + 1) / 2;
    }
    return out;
}

PyramidBackbone::PyramidBackbone(const PyramidConfig& cfg, const ParamInit& init) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t D = cfg_.tag.dim, K = cfg_.embed_kernel;
    embed_weight = init.fan_in("embed.weight", {K, cfg_.input_dim, D}, K * cfg_.input_dim);
    embed_bias = init.constant("embed.bias", {1, D}, 0.0);
    embed_norm_gain = init.constant("embed.norm.gain", {1, D}, 1.0);
    embed_norm_bias = init.constant("embed.norm.bias", {1, D}, 0.0);
    layers_.reserve(cfg_.levels);
    for (std::size_t l = 0; l < cfg_.levels; ++l)
        layers_.emplace_back("level" + std::to_string(l) + ".", cfg_.tag, init);
}

ad::Var PyramidBackbone::embed(ad::Graph& g, ad::Var x) {
    if (x.shape().size() != 2 || x.shape()[1] != cfg_.input_dim)
        throw ShapeError("embed: expected T x " + std::to_string(cfg_.input_dim) + " input, got " +
                         ad::shape_str(x.shape()));
    ad::Var h = ad::relu(ad::conv1d(x, g.param(embed_weight), g.param(embed_bias)));
    return ad::layer_norm(h, g.param(embed_norm_gain), g.param(embed_norm_bias));
}

PyramidOutput PyramidBackbone::forward(ad::Graph& g, ad::Var x) {
    PyramidOutput out;
    ad::Var h = embed(g, x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (l > 0) h = ad::max_pool_time(h);
        h = layers_[l].forward(g, h);
        out.levels.push_back(h);
        out.strides.push_back(std::size_t{1} << l);
    }
    return out;
}

ParameterList PyramidBackbone::parameters() {
    ParameterList out{&embed_weight, &embed_bias, &embed_norm_gain, &embed_norm_bias};
    for (TagLayer& layer : layers_) {
        ParameterList p = layer.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

}  // namespace tagdet::model
