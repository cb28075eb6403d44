#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "flowsr/volume.hpp"

namespace flowsr::io {

// FLW4 volume file, little-endian throughout.
//
//   offset  size  field
//        0     4  magic "FLW4"
//        4     2  version (u16) = 1
//        6     4  m (u32)
//       10     4  n (u32)
//       14     4  s (u32)
//       18     4  frame_count (u32)
//       22     8  venc (f64, cm/s)
//       30    24  spacing x, y, z (f64, mm)
//       54     2  channel layout (u16) = 1: magnitude, u, v, w
//       56        payload: for each frame, for each channel in layout order, m*n*s f32 samples
//                 in x-fastest order

inline constexpr std::string_view kMagic = "FLW4";
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kLayoutMagnitudeUVW = 1;
inline constexpr std::size_t kHeaderSize = 56;

struct VolumeFileHeader {
    std::uint16_t version = kVersion;
    std::uint32_t m = 1, n = 1, s = 1;
    std::uint32_t frame_count = 1;
    double venc = 0.0;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::uint16_t layout = kLayoutMagnitudeUVW;

    [[nodiscard]] std::size_t payload_bytes() const {
        return std::size_t(frame_count) * 4 * std::size_t(m) * n * s * sizeof(float);
    }
};

namespace detail {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b)
        out.push_back(std::uint8_t((v >> (8 * b)) & 0xFF));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

template <typename U>
U get_le(const std::uint8_t* p) {
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
        v |= U(p[b]) << (8 * b);
    return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const VelocityDataset& ds) {
    validate(ds);
    const Grid3& g = ds.grid();
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + ds.frames.size() * 4 * g.size() * sizeof(float));
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    detail::put_le(out, kVersion);
    detail::put_le(out, std::uint32_t(g.m));
    detail::put_le(out, std::uint32_t(g.n));
    detail::put_le(out, std::uint32_t(g.s));
    detail::put_le(out, std::uint32_t(ds.frames.size()));
    detail::put_f64(out, ds.params.venc);
    for (double h : g.spacing)
        detail::put_f64(out, h);
    detail::put_le(out, kLayoutMagnitudeUVW);
    for (const auto& f : ds.frames)
        for (const ScalarVolume* v : {&f.magnitude, &f.u, &f.v, &f.w})
            for (double x : v->data())
                detail::put_f32(out, float(x));
    return out;
}

inline VolumeFileHeader decode_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize)
        throw FormatError("truncated header: need " + std::to_string(kHeaderSize) + " bytes, file has " +
                              std::to_string(bytes.size()),
                          bytes.size());
    const std::uint8_t* p = bytes.data();
    if (std::memcmp(p, kMagic.data(), kMagic.size()) != 0)
        throw FormatError("bad magic, expected \"FLW4\"", 0);
    VolumeFileHeader h;
    h.version = detail::get_le<std::uint16_t>(p + 4);
    if (h.version != kVersion)
        throw FormatError("unsupported version " + std::to_string(h.version), 4);
    h.m = detail::get_le<std::uint32_t>(p + 6);
    h.n = detail::get_le<std::uint32_t>(p + 10);
    h.s = detail::get_le<std::uint32_t>(p + 14);
    for (std::size_t a = 0; a < 3; ++a)
        if (detail::get_le<std::uint32_t>(p + 6 + 4 * a) == 0)
            throw FormatError("dimension must be >= 1", 6 + 4 * a);
    h.frame_count = detail::get_le<std::uint32_t>(p + 18);
    if (h.frame_count == 0)
        throw FormatError("frame_count must be >= 1", 18);
    h.venc = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 22));
    if (!(h.venc > 0.0) || !std::isfinite(h.venc))
        throw FormatError("venc must be positive and finite", 22);
    for (std::size_t a = 0; a < 3; ++a) {
        h.spacing[a] = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 30 + 8 * a));
        if (!(h.spacing[a] > 0.0) || !std::isfinite(h.spacing[a]))
            throw FormatError("spacing must be positive and finite", 30 + 8 * a);
    }
    h.layout = detail::get_le<std::uint16_t>(p + 54);
    if (h.layout != kLayoutMagnitudeUVW)
        throw FormatError("unknown channel layout " + std::to_string(h.layout), 54);
    return h;
}

inline VelocityDataset decode(std::span<const std::uint8_t> bytes) {
    const VolumeFileHeader h = decode_header(bytes);
    const std::size_t expected = kHeaderSize + h.payload_bytes();
    if (bytes.size() < expected)
        throw FormatError("truncated payload: expected " + std::to_string(expected) + " bytes, file has " +
                              std::to_string(bytes.size()),
                          bytes.size());
    if (bytes.size() > expected)
        throw FormatError("trailing bytes after payload", expected);

    const Grid3 g(h.m, h.n, h.s, h.spacing);
    VelocityDataset ds;
    ds.params = AcquisitionParams{h.venc, h.frame_count, 0.0};
    std::size_t off = kHeaderSize;
    for (std::uint32_t f = 0; f < h.frame_count; ++f) {
        VelocityFrame fr{ScalarVolume(g), ScalarVolume(g), ScalarVolume(g), ScalarVolume(g)};
        for (ScalarVolume* v : {&fr.magnitude, &fr.u, &fr.v, &fr.w})
            for (std::size_t i = 0; i < g.size(); ++i, off += 4) {
                const float x = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes.data() + off));
                if (!std::isfinite(x))
                    throw FormatError("non-finite sample", off);
                (*v)[i] = x;
            }
        ds.frames.push_back(std::move(fr));
    }
    return ds;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary file and renames it over the target, so readers never see a
/// partially written file.
inline void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        out.flush();
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    write_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void save(const std::filesystem::path& path, const VelocityDataset& ds) { write_atomic(path, encode(ds)); }

inline VelocityDataset load(const std::filesystem::path& path) { return decode(read_bytes(path)); }

}  // namespace flowsr::io

namespace flowsr {

/// Reads an externally produced velocity dataset in the FLW4 format.
inline VelocityDataset load_external(const std::filesystem::path& path) {
    VelocityDataset ds = io::load(path);
    validate(ds);
    return ds;
}

}  // namespace flowsr
