// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/data/feature_file.hpp"

#include <cmath>
#include <limits>

#include <zlib.h>

#include "tagdet/errors.hpp"
#include "tagdet/io/binary.hpp"

namespace tagdet::data {
namespace {

constexpr char kMagic[] = "TADF";

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t done = 0;
    while (done < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - done, std::numeric_limits<uInt>::max());
        crc = crc32(crc, bytes.data() + done, static_cast<uInt>(n));
        done += n;
    }
    return static_cast<std::uint32_t>(crc);
}

void check_timing(double delta, double duration, std::size_t T, std::size_t delta_at) {
    if (!std::isfinite(delta) || !(delta > 0.0))
        throw FormatError("features: delta_seconds must be a positive finite number", delta_at);
    if (!std::isfinite(duration) || !(duration > 0.0))
        throw FormatError("features: duration must be a positive finite number", delta_at + 8);
    const double covered = static_cast<double>(T) * delta;
    if (covered > (duration + delta) * (1.0 + 1e-12))
        throw FormatError("features: " + std::to_string(T) + " rows of " + std::to_string(delta) +
                              " s exceed the duration " + std::to_string(duration) + " s",
                          delta_at + 8);
}

}  // namespace

void FeatureSequence::validate() const {
    if (values.rank() != 2) throw ShapeError("features: values must be T x D, got " + ad::shape_str(values.shape()));
    check_timing(delta_seconds, duration_seconds, length(), 14);
    if (!values.all_finite()) throw FormatError("features: non-finite value", kFeatureHeaderSize);
}

std::vector<std::uint8_t> encode_features(const FeatureSequence& seq, std::uint16_t version) {
    if (version != kFeatureFileV1 && version != kFeatureFileV2)
        throw std::invalid_argument("features: cannot write version " + std::to_string(version));
    seq.validate();
    io::ByteWriter w;
    w.raw(std::string_view(kMagic, 4));
    w.u16(version);
    w.u32(static_cast<std::uint32_t>(seq.length()));
    w.u32(static_cast<std::uint32_t>(seq.dim()));
    w.f64(seq.delta_seconds);
    w.f64(seq.duration_seconds);
    for (double v : seq.values.values()) w.f32(static_cast<float>(v));
    if (version == kFeatureFileV2) w.u32(crc32_of(w.bytes()));
    return std::move(w.bytes());
}

FeatureSequence decode_features(std::span<const std::uint8_t> bytes, std::string video_id) {
    io::ByteReader r(bytes);
    if (r.raw(4) != std::string_view(kMagic, 4)) throw FormatError("features: bad magic", 0);
    const std::uint16_t version = r.u16();
    if (version != kFeatureFileV1 && version != kFeatureFileV2)
        throw FormatError("features: unsupported version " + std::to_string(version), 4);
    const std::uint32_t T = r.u32();
    if (T == 0) throw FormatError("features: T must be >= 1", 6);
    const std::uint32_t D = r.u32();
    if (D == 0) throw FormatError("features: D must be >= 1", 10);
    const double delta = r.f64();
    const double duration = r.f64();

    const std::uint64_t count = static_cast<std::uint64_t>(T) * D;
    const std::uint64_t trailer = version == kFeatureFileV2 ? 4 : 0;
    const std::uint64_t expected = kFeatureHeaderSize + count * 4 + trailer;
    if (bytes.size() != expected)
        throw FormatError("features: file is " + std::to_string(bytes.size()) + " bytes, header declares " +
                              std::to_string(T) + "x" + std::to_string(D) + " (" + std::to_string(expected) +
                              " bytes)",
                          std::min<std::size_t>(bytes.size(), kFeatureHeaderSize));
    if (version == kFeatureFileV2) {
        const std::size_t crc_at = bytes.size() - 4;
        io::ByteReader tail(bytes.subspan(crc_at));
        if (tail.u32() != crc32_of(bytes.first(crc_at))) throw FormatError("features: checksum mismatch", crc_at);
    }
    check_timing(delta, duration, T, 14);

    FeatureSequence seq;
    seq.video_id = std::move(video_id);
    seq.delta_seconds = delta;
    seq.duration_seconds = duration;
    std::vector<double> values(count);
    for (auto& v : values) {
        const std::size_t at = r.offset();
        v = static_cast<double>(r.f32());
        if (!std::isfinite(v)) throw FormatError("features: non-finite value", at);
    }
    seq.values = ad::Tensor({T, D}, std::move(values));
    return seq;
}

void write_features(const std::filesystem::path& path, const FeatureSequence& seq, std::uint16_t version) {
    io::write_file_atomic(path, encode_features(seq, version));
}

FeatureSequence load_features(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    FeatureSequence seq = decode_features(io::read_file(path), path.stem().string());
    if (expected_dim && seq.dim() != *expected_dim)
        throw FormatError("features: " + path.string() + " has D=" + std::to_string(seq.dim()) +
                              ", manifest declares " + std::to_string(*expected_dim),
                          10);
    return seq;
}

}  // namespace tagdet::data
