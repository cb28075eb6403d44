#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "flowsr/error.hpp"

namespace flowsr {

using complex_t = std::complex<double>;

/// Voxel lattice. Storage order is x fastest, then y, then z:
/// index(i, j, k) = i + m * (j + n * k).
struct Grid3 {
    std::size_t m = 1;  // rows, x
    std::size_t n = 1;  // columns, y
    std::size_t s = 1;  // slices, z
    std::array<double, 3> spacing{1.0, 1.0, 1.0};  // mm

    Grid3() = default;
    Grid3(std::size_t m_, std::size_t n_, std::size_t s_, std::array<double, 3> spacing_ = {1.0, 1.0, 1.0})
        : m(m_), n(n_), s(s_), spacing(spacing_) {
        if (m == 0 || n == 0 || s == 0)
            throw ParameterError("grid dimensions must be >= 1");
        for (double h : spacing)
            if (!(h > 0.0) || !std::isfinite(h))
                throw ParameterError("grid spacing must be positive and finite");
    }

    [[nodiscard]] std::size_t size() const noexcept { return m * n * s; }
    [[nodiscard]] std::array<std::size_t, 3> dims() const noexcept { return {m, n, s}; }
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return i + m * (j + n * k);
    }

    /// Same lattice shape; spacing is metadata and does not take part.
    [[nodiscard]] bool same_shape(const Grid3& o) const noexcept { return m == o.m && n == o.n && s == o.s; }

    friend bool operator==(const Grid3&, const Grid3&) = default;
};

inline std::string to_string(const Grid3& g) {
    return std::to_string(g.m) + "x" + std::to_string(g.n) + "x" + std::to_string(g.s);
}

/// Integer decimation rates (d_r, d_c, d_s) along x, y, z.
struct Decimation {
    std::size_t r = 1;
    std::size_t c = 1;
    std::size_t s = 1;

    [[nodiscard]] std::size_t total() const noexcept { return r * c * s; }
    [[nodiscard]] std::array<std::size_t, 3> rates() const noexcept { return {r, c, s}; }

    friend bool operator==(const Decimation&, const Decimation&) = default;
};

inline std::string to_string(const Decimation& d) {
    return std::to_string(d.r) + "," + std::to_string(d.c) + "," + std::to_string(d.s);
}

inline void validate(const Decimation& d) {
    if (d.r == 0 || d.c == 0 || d.s == 0)
        throw ParameterError("decimation rates must be >= 1");
}

/// Low-resolution lattice of a high-resolution grid; throws if a rate does not divide its axis.
inline Grid3 decimate(const Grid3& hr, const Decimation& d) {
    validate(d);
    if (hr.m % d.r != 0 || hr.n % d.c != 0 || hr.s % d.s != 0)
        throw ConfigurationError("decimation " + to_string(d) + " does not divide grid " + to_string(hr));
    return Grid3(hr.m / d.r, hr.n / d.c, hr.s / d.s,
                 {hr.spacing[0] * double(d.r), hr.spacing[1] * double(d.c), hr.spacing[2] * double(d.s)});
}

inline Grid3 upscale(const Grid3& lr, const Decimation& d) {
    validate(d);
    return Grid3(lr.m * d.r, lr.n * d.c, lr.s * d.s,
                 {lr.spacing[0] / double(d.r), lr.spacing[1] / double(d.c), lr.spacing[2] / double(d.s)});
}

namespace detail {
inline bool finite(double v) noexcept { return std::isfinite(v); }
inline bool finite(const complex_t& v) noexcept { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
}  // namespace detail

/// Dense 3D volume of samples on a Grid3.
template <typename T>
class Volume {
public:
    using value_type = T;

    Volume() = default;
    explicit Volume(const Grid3& grid, T fill = T{}) : grid_(grid), data_(grid.size(), fill) {}
    Volume(const Grid3& grid, std::vector<T> data) : grid_(grid), data_(std::move(data)) {
        if (data_.size() != grid_.size())
            throw DimensionError("volume data length " + std::to_string(data_.size()) + " does not match grid " +
                                 to_string(grid_));
    }

    [[nodiscard]] const Grid3& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& storage() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    T& operator[](std::size_t idx) noexcept { return data_[idx]; }
    const T& operator[](std::size_t idx) const noexcept { return data_[idx]; }

    T& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return data_[grid_.index(i, j, k)]; }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[grid_.index(i, j, k)];
    }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](const T& v) { return detail::finite(v); });
    }

private:
    Grid3 grid_;
    std::vector<T> data_;
};

using ScalarVolume = Volume<double>;
using ComplexVolume = Volume<complex_t>;

template <typename T>
void require_same_shape(const Volume<T>& a, const Grid3& g, const char* what) {
    if (!a.grid().same_shape(g))
        throw DimensionError(std::string(what) + ": grid " + to_string(a.grid()) + " does not match expected " +
                             to_string(g));
}

template <typename T>
void require_finite(const Volume<T>& v, const char* what) {
    if (!v.all_finite())
        throw ParameterError(std::string(what) + ": non-finite sample");
}

struct AcquisitionParams {
    double venc = 100.0;          // cm/s
    std::size_t frame_count = 1;  // cardiac phases
    double frame_interval = 0.0;  // s, metadata only
};

inline void validate(const AcquisitionParams& p) {
    if (!(p.venc > 0.0) || !std::isfinite(p.venc))
        throw ParameterError("venc must be positive");
    if (p.frame_count < 1)
        throw ParameterError("frame_count must be >= 1");
}

enum class Channel { u = 0, v = 1, w = 2 };
inline constexpr std::array<Channel, 3> kChannels{Channel::u, Channel::v, Channel::w};

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::u: return "u";
        case Channel::v: return "v";
        case Channel::w: return "w";
    }
    return "?";
}

/// Magnitude plus the three velocity components of one cardiac phase.
struct VelocityFrame {
    ScalarVolume magnitude;
    ScalarVolume u;
    ScalarVolume v;
    ScalarVolume w;

    [[nodiscard]] const Grid3& grid() const noexcept { return magnitude.grid(); }

    ScalarVolume& velocity(Channel c) {
        switch (c) {
            case Channel::u: return u;
            case Channel::v: return v;
            default: return w;
        }
    }
    [[nodiscard]] const ScalarVolume& velocity(Channel c) const {
        return const_cast<VelocityFrame*>(this)->velocity(c);
    }
};

struct VelocityDataset {
    AcquisitionParams params;
    std::vector<VelocityFrame> frames;

    [[nodiscard]] const Grid3& grid() const { return frames.at(0).grid(); }
};

/// Checks the dataset invariants: shared grid per frame, frame count, finite samples.
inline void validate(const VelocityDataset& ds) {
    validate(ds.params);
    if (ds.frames.size() != ds.params.frame_count)
        throw DimensionError("dataset holds " + std::to_string(ds.frames.size()) + " frames, header says " +
                             std::to_string(ds.params.frame_count));
    const Grid3& g = ds.frames.front().grid();
    for (const auto& f : ds.frames) {
        require_same_shape(f.magnitude, g, "magnitude");
        for (Channel c : kChannels) {
            require_same_shape(f.velocity(c), g, "velocity");
            require_finite(f.velocity(c), "velocity");
        }
        require_finite(f.magnitude, "magnitude");
    }
}

// ---------------------------------------------------------------------------
// Velocity <-> phase <-> complex signal

inline void require_venc(double venc) {
    if (!(venc > 0.0) || !std::isfinite(venc))
        throw ParameterError("venc must be positive, got " + std::to_string(venc));
}

/// Phi = pi * v / venc, voxelwise.
inline ScalarVolume velocity_to_phase(const ScalarVolume& vel, double venc) {
    require_venc(venc);
    ScalarVolume out(vel.grid());
    const double scale = std::numbers::pi / venc;
    for (std::size_t i = 0; i < vel.size(); ++i)
        out[i] = scale * vel[i];
    return out;
}

/// v = venc * Phi / pi, voxelwise.
inline ScalarVolume phase_to_velocity(const ScalarVolume& phase, double venc) {
    require_venc(venc);
    ScalarVolume out(phase.grid());
    const double scale = venc / std::numbers::pi;
    for (std::size_t i = 0; i < phase.size(); ++i)
        out[i] = scale * phase[i];
    return out;
}

enum class AliasPolicy {
    strict,       // |v| < venc
    allow_bound,  // |v| <= venc; measured data whose phase was already wrapped into (-pi, pi]
};

/// A * exp(i * pi * v / venc) voxelwise.
inline ComplexVolume synthesize_complex(const ScalarVolume& magnitude, const ScalarVolume& vel, double venc,
                                        AliasPolicy policy = AliasPolicy::strict) {
    require_venc(venc);
    require_same_shape(vel, magnitude.grid(), "synthesize_complex");
    std::size_t aliased = 0;
    for (std::size_t i = 0; i < vel.size(); ++i) {
        const double a = std::abs(vel[i]);
        if (!std::isfinite(vel[i]) || (policy == AliasPolicy::strict ? a >= venc : a > venc))
            ++aliased;
        if (!(magnitude[i] >= 0.0) || !std::isfinite(magnitude[i]))
            throw ParameterError("synthesize_complex: magnitude must be finite and >= 0");
    }
    if (aliased > 0)
        throw AliasingError(aliased, venc);

    ComplexVolume out(magnitude.grid());
    const double scale = std::numbers::pi / venc;
    for (std::size_t i = 0; i < vel.size(); ++i)
        out[i] = std::polar(magnitude[i], scale * vel[i]);
    return out;
}

struct MagnitudeVelocity {
    ScalarVolume magnitude;
    ScalarVolume velocity;
};

/// |signal| and venc * arg(signal) / pi with arg in (-pi, pi] and arg(0) = 0.
inline MagnitudeVelocity extract_velocity(const ComplexVolume& signal, double venc) {
    require_venc(venc);
    MagnitudeVelocity out{ScalarVolume(signal.grid()), ScalarVolume(signal.grid())};
    const double scale = venc / std::numbers::pi;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const complex_t z = signal[i];
        out.magnitude[i] = std::abs(z);
        // atan2 returns -pi for (-x, -0.0); fold it onto +pi to stay in (-pi, pi].
        double phi = (z == complex_t{}) ? 0.0 : std::arg(z);
        if (phi <= -std::numbers::pi)
            phi = std::numbers::pi;
        out.velocity[i] = std::clamp(scale * phi, -venc, venc);
    }
    return out;
}

}  // namespace flowsr
