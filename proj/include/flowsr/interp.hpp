#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "flowsr/volume.hpp"

namespace flowsr {

enum class InterpMethod { trilinear, tricubic };

inline const char* method_name(InterpMethod m) { return m == InterpMethod::trilinear ? "trilinear" : "tricubic"; }

inline InterpMethod parse_interp(const std::string& s) {
    if (s == "trilinear")
        return InterpMethod::trilinear;
    if (s == "tricubic")
        return InterpMethod::tricubic;
    throw ParameterError("unknown interpolation method '" + s + "' (expected trilinear|tricubic)");
}

namespace detail {

/// Taps and weights for one output sample of a 1D upsampling by `rate`.
struct Stencil {
    std::array<std::size_t, 4> idx{};
    std::array<double, 4> w{};
    int taps = 0;
};

// Catmull-Rom (Keys, a = -0.5) cubic convolution weights for offset t in [0, 1).
inline std::array<double, 4> catmull_rom(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2};
}

/// HR sample i sits at LR coordinate i / rate (offset-0 alignment with decimation); clamp-to-edge.
inline std::vector<Stencil> make_stencils(std::size_t lr_len, std::size_t rate, InterpMethod method) {
    std::vector<Stencil> out(lr_len * rate);
    auto clamp = [lr_len](long i) { return std::size_t(std::clamp<long>(i, 0, long(lr_len) - 1)); };
    for (std::size_t i = 0; i < out.size(); ++i) {
        const long base = long(i / rate);
        const double t = double(i % rate) / double(rate);
        Stencil& st = out[i];
        if (method == InterpMethod::trilinear) {
            st.taps = 2;
            st.idx = {clamp(base), clamp(base + 1), 0, 0};
            st.w = {1.0 - t, t, 0.0, 0.0};
        } else {
            st.taps = 4;
            st.idx = {clamp(base - 1), clamp(base), clamp(base + 1), clamp(base + 2)};
            st.w = catmull_rom(t);
        }
    }
    return out;
}

template <typename T>
Volume<T> resample_axis(const Volume<T>& in, int axis, std::size_t rate, InterpMethod method, const Grid3& out_grid) {
    const Grid3& g = in.grid();
    const auto dims = g.dims();
    const auto stencils = make_stencils(dims[axis], rate, method);
    Volume<T> out(out_grid);
    for (std::size_t k = 0; k < out_grid.s; ++k)
        for (std::size_t j = 0; j < out_grid.n; ++j)
            for (std::size_t i = 0; i < out_grid.m; ++i) {
                std::array<std::size_t, 3> p{i, j, k};
                const Stencil& st = stencils[p[axis]];
                T acc{};
                for (int t = 0; t < st.taps; ++t) {
                    p[axis] = st.idx[t];
                    acc += st.w[t] * in(p[0], p[1], p[2]);
                }
                out(i, j, k) = acc;
            }
    return out;
}

}  // namespace detail

/// Upsamples by d with separable trilinear or Catmull-Rom tricubic interpolation. LR voxel
/// (i, j, k) lands on HR voxel (d_r i, d_c j, d_s k); samples past the last LR voxel clamp to it.
/// Works for real and complex volumes (complex: real and imaginary parts independently).
template <typename T>
Volume<T> upsample(const Volume<T>& lr, const Decimation& d, InterpMethod method) {
    validate(d);
    const Grid3& g = lr.grid();
    const Grid3 hr = upscale(g, d);
    Grid3 gx(hr.m, g.n, g.s, g.spacing);
    Grid3 gy(hr.m, hr.n, g.s, g.spacing);
    auto a = detail::resample_axis(lr, 0, d.r, method, gx);
    auto b = detail::resample_axis(a, 1, d.c, method, gy);
    return detail::resample_axis(b, 2, d.s, method, hr);
}

inline ScalarVolume upsample_velocity(const ScalarVolume& vel, const Decimation& d, InterpMethod method) {
    return upsample(vel, d, method);
}

/// Interpolates magnitude and all three velocity channels of every frame.
inline VelocityDataset upsample_dataset(const VelocityDataset& lr, const Decimation& d, InterpMethod method) {
    validate(lr);
    VelocityDataset out;
    out.params = lr.params;
    out.frames.reserve(lr.frames.size());
    for (const auto& f : lr.frames)
        out.frames.push_back(VelocityFrame{upsample(f.magnitude, d, method), upsample(f.u, d, method),
                                           upsample(f.v, d, method), upsample(f.w, d, method)});
    return out;
}

}  // namespace flowsr
