#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include "flowsr/volume.hpp"

namespace flowsr::test {

inline ComplexVolume random_complex(const Grid3& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    ComplexVolume v(g);
    for (auto& z : v.data())
        z = {n(rng), n(rng)};
    return v;
}

inline ScalarVolume random_real(const Grid3& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarVolume v(g);
    for (auto& x : v.data())
        x = u(rng);
    return v;
}

/// sum conj(a) b
inline complex_t inner(const ComplexVolume& a, const ComplexVolume& b) {
    complex_t acc{};
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double norm2(const ComplexVolume& a) { return std::sqrt(std::abs(inner(a, a))); }

inline double rel_diff(const ComplexVolume& a, const ComplexVolume& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += std::norm(a[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const ScalarVolume& a, const ScalarVolume& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Direct O(N^2) unitary 3D DFT: X[k] = N^{-1/2} sum_n x[n] exp(sign 2 pi i <k, n / dims>).
inline ComplexVolume brute_dft(const ComplexVolume& x, int sign) {
    const Grid3& g = x.grid();
    ComplexVolume out(g);
    const double scale = 1.0 / std::sqrt(double(g.size()));
    for (std::size_t k3 = 0; k3 < g.s; ++k3)
        for (std::size_t k2 = 0; k2 < g.n; ++k2)
            for (std::size_t k1 = 0; k1 < g.m; ++k1) {
                complex_t acc{};
                for (std::size_t n3 = 0; n3 < g.s; ++n3)
                    for (std::size_t n2 = 0; n2 < g.n; ++n2)
                        for (std::size_t n1 = 0; n1 < g.m; ++n1) {
                            const double ph = double((k1 * n1) % g.m) / double(g.m) +
                                              double((k2 * n2) % g.n) / double(g.n) +
                                              double((k3 * n3) % g.s) / double(g.s);
                            acc += x(n1, n2, n3) * std::polar(1.0, sign * 2.0 * std::numbers::pi * ph);
                        }
                out(k1, k2, k3) = acc * scale;
            }
    return out;
}

/// S H x computed without folding: H applied as F^H diag(spec) F with the direct DFT, then the
/// voxel at offset 0 of every d-block is kept.
inline ComplexVolume brute_SH(const ComplexVolume& x, const std::vector<complex_t>& spec, const Decimation& d) {
    ComplexVolume X = brute_dft(x, -1);
    for (std::size_t i = 0; i < X.size(); ++i)
        X[i] *= spec[i];
    const ComplexVolume hx = brute_dft(X, +1);
    const Grid3& g = x.grid();
    const Grid3 lr(g.m / d.r, g.n / d.c, g.s / d.s);
    ComplexVolume y(lr);
    for (std::size_t k = 0; k < lr.s; ++k)
        for (std::size_t j = 0; j < lr.n; ++j)
            for (std::size_t i = 0; i < lr.m; ++i)
                y(i, j, k) = hx(i * d.r, j * d.c, k * d.s);
    return y;
}

}  // namespace flowsr::test
