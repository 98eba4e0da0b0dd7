// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/train/checkpoint.hpp"

#include <map>

#include "tagdet/errors.hpp"
#include "tagdet/io/binary.hpp"

namespace tagdet::train {
namespace {

constexpr char kMagic[] = "TADC";

void put_tensors(io::ByteWriter& w, const std::vector<NamedTensor>& list) {
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const NamedTensor& nt : list) {
        w.u32(static_cast<std::uint32_t>(nt.name.size()));
        w.raw(nt.name);
        w.u32(static_cast<std::uint32_t>(nt.value.rank()));
        for (std::size_t d : nt.value.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (double v : nt.value.values()) w.f64(v);
    }
}

std::vector<NamedTensor> get_tensors(io::ByteReader& r) {
    const std::uint32_t n = r.u32();
    std::vector<NamedTensor> out;
    for (std::uint32_t i = 0; i < n; ++i) {
        NamedTensor nt;
        const std::uint32_t name_len = r.u32();
        nt.name = r.raw(name_len);
        const std::size_t rank_at = r.offset();
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) throw FormatError("checkpoint: bad tensor rank " + std::to_string(rank), rank_at);
        ad::Shape shape(rank);
        std::uint64_t numel = 1;
        for (auto& d : shape) {
            const std::size_t at = r.offset();
            d = r.u32();
            if (d == 0) throw FormatError("checkpoint: zero dimension in " + nt.name, at);
            numel *= d;
            if (numel > r.remaining()) throw FormatError("checkpoint: tensor " + nt.name + " exceeds file", at);
        }
        r.require(numel * 8);
        std::vector<double> values(numel);
        for (auto& v : values) v = r.f64();
        nt.value = ad::Tensor(std::move(shape), std::move(values));
        out.push_back(std::move(nt));
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    io::ByteWriter w;
    w.raw(std::string_view(kMagic, 4));
    w.u16(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(ckpt.config.size()));
    w.raw(ckpt.config);
    w.u64(ckpt.step);
    put_tensors(w, ckpt.params);
    put_tensors(w, ckpt.adam_m);
    put_tensors(w, ckpt.adam_v);
    return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    if (r.raw(4) != std::string_view(kMagic, 4)) throw FormatError("checkpoint: bad magic", 0);
    const std::uint16_t version = r.u16();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version), 4);
    Checkpoint ckpt;
    ckpt.config = r.raw(r.u32());
    ckpt.step = r.u64();
    ckpt.params = get_tensors(r);
    ckpt.adam_m = get_tensors(r);
    ckpt.adam_v = get_tensors(r);
    if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes", r.offset());
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    io::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

Checkpoint capture(const model::ParameterList& params, const Adam* optimizer, std::string config, std::uint64_t step) {
    Checkpoint ckpt;
    ckpt.config = std::move(config);
    ckpt.step = step;
    if (optimizer && optimizer->params() != params)
        throw std::logic_error("capture: optimizer tracks a different parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) {
        ckpt.params.push_back({params[i]->name, params[i]->value});
        if (optimizer) {
            ckpt.adam_m.push_back({params[i]->name, optimizer->first_moments()[i]});
            ckpt.adam_v.push_back({params[i]->name, optimizer->second_moments()[i]});
        }
    }
    return ckpt;
}

void restore_parameters(const model::ParameterList& params, const Checkpoint& ckpt) {
    std::map<std::string, const ad::Tensor*> by_name;
    for (const NamedTensor& nt : ckpt.params) by_name[nt.name] = &nt.value;
    for (ad::Parameter* p : params) {
        auto it = by_name.find(p->name);
        if (it == by_name.end()) throw ConfigError("checkpoint: missing parameter " + p->name);
        if (it->second->shape() != p->value.shape())
            throw ConfigError("checkpoint: parameter " + p->name + " has shape " + ad::shape_str(it->second->shape()) +
                              ", model expects " + ad::shape_str(p->value.shape()));
        p->value = *it->second;
    }
}

void restore_optimizer(Adam& optimizer, const Checkpoint& ckpt) {
    const auto& params = optimizer.params();
    if (ckpt.adam_m.size() != params.size() || ckpt.adam_v.size() != params.size())
        throw ConfigError("checkpoint: optimizer state has " + std::to_string(ckpt.adam_m.size()) +
                          " entries, model has " + std::to_string(params.size()) + " parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (ckpt.adam_m[i].name != params[i]->name || ckpt.adam_v[i].name != params[i]->name ||
            ckpt.adam_m[i].value.shape() != params[i]->value.shape() ||
            ckpt.adam_v[i].value.shape() != params[i]->value.shape())
            throw ConfigError("checkpoint: optimizer state does not match parameter " + params[i]->name);
        optimizer.first_moments()[i] = ckpt.adam_m[i].value;
        optimizer.second_moments()[i] = ckpt.adam_v[i].value;
    }
    optimizer.set_steps(ckpt.step);
}

}  // namespace tagdet::train
