#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "flowsr/volume.hpp"

namespace flowsr {

/// Pulsatile peak-speed waveform: vmax * (0.6 + 0.4 sin(2 pi t / frames)), always positive.
inline std::vector<double> pulsatile_waveform(double vmax, std::size_t frames) {
    std::vector<double> out(frames);
    for (std::size_t t = 0; t < frames; ++t)
        out[t] = vmax * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * double(t) / double(frames)));
    return out;
}

struct PoiseuilleParams {
    double radius_voxels = 16.0;
    int axis = 2;                      // tube axis: 0 = x, 1 = y, 2 = z
    std::vector<double> v_max{100.0};  // centerline speed per frame, cm/s
    double venc = 150.0;
    double magnitude_in = 1.0;
    double magnitude_out = 0.0;
};

namespace detail {
/// Distance in voxels from the tube axis, which passes through the grid center.
inline double radial_distance(const Grid3& g, int axis, std::size_t i, std::size_t j, std::size_t k) {
    const std::array<double, 3> p{double(i) - 0.5 * double(g.m - 1), double(j) - 0.5 * double(g.n - 1),
                                  double(k) - 0.5 * double(g.s - 1)};
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a)
        if (a != axis)
            r2 += p[a] * p[a];
    return std::sqrt(r2);
}

inline void check_tube(const Grid3& g, int axis, double radius, double venc, const std::vector<double>& speeds,
                       double m_in, double m_out) {
    if (axis < 0 || axis > 2)
        throw ParameterError("tube axis must be 0, 1 or 2");
    require_venc(venc);
    if (speeds.empty())
        throw ParameterError("phantom needs at least one frame");
    const auto dims = g.dims();
    double fit = 1e300;
    for (int a = 0; a < 3; ++a)
        if (a != axis)
            fit = std::min(fit, 0.5 * double(dims[a]));
    if (!(radius > 0.0) || radius > fit)
        throw ParameterError("tube radius " + std::to_string(radius) + " does not fit in grid " + to_string(g));
    if (!(m_in >= 0.0) || !(m_out >= 0.0))
        throw ParameterError("phantom magnitudes must be >= 0");
}
}  // namespace detail

/// Laminar tube flow: v = v_max(t) (1 - (r/R)^2) along the axis for r < R, zero elsewhere.
inline VelocityDataset poiseuille_phantom(const Grid3& grid, const PoiseuilleParams& p) {
    detail::check_tube(grid, p.axis, p.radius_voxels, p.venc, p.v_max, p.magnitude_in, p.magnitude_out);
    std::size_t aliased = 0;
    for (double v : p.v_max)
        if (std::abs(v) >= p.venc)
            ++aliased;
    if (aliased)
        throw AliasingError(aliased, p.venc);

    VelocityDataset ds;
    ds.params = AcquisitionParams{p.venc, p.v_max.size(), 0.0};
    const double R = p.radius_voxels;
    for (double vmax : p.v_max) {
        VelocityFrame f{ScalarVolume(grid), ScalarVolume(grid), ScalarVolume(grid), ScalarVolume(grid)};
        ScalarVolume& along = f.velocity(Channel(p.axis));
        for (std::size_t k = 0; k < grid.s; ++k)
            for (std::size_t j = 0; j < grid.n; ++j)
                for (std::size_t i = 0; i < grid.m; ++i) {
                    const double r = detail::radial_distance(grid, p.axis, i, j, k);
                    const std::size_t idx = grid.index(i, j, k);
                    if (r < R) {
                        f.magnitude[idx] = p.magnitude_in;
                        along[idx] = vmax * (1.0 - (r / R) * (r / R));
                    } else {
                        f.magnitude[idx] = p.magnitude_out;
                    }
                }
        ds.frames.push_back(std::move(f));
    }
    return ds;
}

struct HelixParams {
    double radius_voxels = 16.0;
    std::vector<double> v_axial{80.0};  // centerline axial speed per frame, cm/s
    double swirl_ratio = 0.5;           // peak tangential speed / centerline axial speed
    double venc = 150.0;
    double magnitude_in = 1.0;
    double magnitude_out = 0.0;
};

/// Swirling tube flow along z. With s = r/R inside the tube:
///   axial      v_z   = v_axial (1 - s^2)
///   tangential v_phi = swirl_ratio * v_axial * s (1 - s^2) * 3 sqrt(3) / 2   (peak value at s = 1/sqrt(3))
/// so (u, v) = v_phi * (-y, x) / r. Any field f(r) (-y, x) plus an axial component independent of z
/// is divergence free.
inline VelocityDataset helix_phantom(const Grid3& grid, const HelixParams& p) {
    detail::check_tube(grid, 2, p.radius_voxels, p.venc, p.v_axial, p.magnitude_in, p.magnitude_out);
    const double R = p.radius_voxels;
    const double norm = 1.5 * std::sqrt(3.0);
    const double cx = 0.5 * double(grid.m - 1), cy = 0.5 * double(grid.n - 1);

    VelocityDataset ds;
    ds.params = AcquisitionParams{p.venc, p.v_axial.size(), 0.0};
    std::size_t aliased = 0;
    for (double vax : p.v_axial) {
        VelocityFrame f{ScalarVolume(grid), ScalarVolume(grid), ScalarVolume(grid), ScalarVolume(grid)};
        for (std::size_t k = 0; k < grid.s; ++k)
            for (std::size_t j = 0; j < grid.n; ++j)
                for (std::size_t i = 0; i < grid.m; ++i) {
                    const double x = double(i) - cx, y = double(j) - cy;
                    const double r = std::hypot(x, y);
                    const std::size_t idx = grid.index(i, j, k);
                    if (r >= R) {
                        f.magnitude[idx] = p.magnitude_out;
                        continue;
                    }
                    const double s = r / R;
                    const double vphi = p.swirl_ratio * vax * s * (1.0 - s * s) * norm;
                    f.magnitude[idx] = p.magnitude_in;
                    f.u[idx] = r > 0.0 ? -vphi * y / r : 0.0;
                    f.v[idx] = r > 0.0 ? vphi * x / r : 0.0;
                    f.w[idx] = vax * (1.0 - s * s);
                    if (std::abs(f.u[idx]) >= p.venc || std::abs(f.v[idx]) >= p.venc || std::abs(f.w[idx]) >= p.venc)
                        ++aliased;
                }
        ds.frames.push_back(std::move(f));
    }
    if (aliased)
        throw AliasingError(aliased, p.venc);
    return ds;
}

}  // namespace flowsr
