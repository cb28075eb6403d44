#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "flowsr/fsr_solver.hpp"
#include "flowsr/volume.hpp"

namespace flowsr::oracle {

// Brute-force reference for the fast operators: explicit S and H matrices and a dense solve of the
// normal equations. Nothing here goes through FFTW or the alias folding used by the fast path.

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxVoxels = 4096;

struct DenseOperators {
    Grid3 hr;
    Grid3 lr;
    Decimation d;
    Eigen::MatrixXd S;  // N_l x N_h selection
    Matrix H;           // N_h x N_h circular convolution
};

/// Separable naive DFT along all three axes, sign -1 (forward) or +1 (inverse), unitary scaling.
inline std::vector<complex_t> naive_dft(const Grid3& g, std::vector<complex_t> data, int sign) {
    const std::array<std::size_t, 3> dims = g.dims();
    const std::array<std::size_t, 3> stride{1, g.m, g.m * g.n};
    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t len = dims[axis];
        std::vector<complex_t> tw(len);
        for (std::size_t t = 0; t < len; ++t)
            tw[t] = std::polar(1.0 / std::sqrt(double(len)), sign * 2.0 * std::numbers::pi * double(t) / double(len));
        std::vector<complex_t> line(len);
        for (std::size_t base = 0; base < g.size(); ++base) {
            const std::size_t coord = (base / stride[axis]) % len;
            if (coord != 0)
                continue;  // visit each line once, from its first element
            for (std::size_t k = 0; k < len; ++k) {
                complex_t acc{};
                for (std::size_t n = 0; n < len; ++n)
                    acc += data[base + n * stride[axis]] * tw[(k * n) % len];
                line[k] = acc;
            }
            for (std::size_t k = 0; k < len; ++k)
                data[base + k * stride[axis]] = line[k];
        }
    }
    return data;
}

/// Dense unitary 3D DFT matrix on g, entry (k, n) = exp(-2 pi i <k, n / dims>) / sqrt(N).
inline Matrix dft_matrix(const Grid3& g) {
    Matrix F(g.size(), g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        std::vector<complex_t> e(g.size());
        e[n] = 1.0;
        const auto col = naive_dft(g, std::move(e), -1);
        for (std::size_t k = 0; k < g.size(); ++k)
            F(Eigen::Index(k), Eigen::Index(n)) = col[k];
    }
    return F;
}

inline void require_small(const Grid3& g) {
    if (g.size() > kMaxVoxels)
        throw ParameterError("dense oracle limited to " + std::to_string(kMaxVoxels) + " voxels, got " + to_string(g));
}

/// S keeps voxel (d_r i, d_c j, d_s k) for LR voxel (i, j, k); H column c is the kernel's impulse
/// response circularly shifted to voxel c.
inline DenseOperators build_dense(const Grid3& hr, const KernelSpectrum& kernel, const Decimation& d) {
    require_small(hr);
    require_spectrum(kernel, hr);
    DenseOperators ops{hr, decimate(hr, d), d, {}, {}};
    const Grid3& lr = ops.lr;
    const auto Nh = Eigen::Index(hr.size()), Nl = Eigen::Index(lr.size());

    ops.S = Eigen::MatrixXd::Zero(Nl, Nh);
    for (std::size_t k = 0; k < lr.s; ++k)
        for (std::size_t j = 0; j < lr.n; ++j)
            for (std::size_t i = 0; i < lr.m; ++i)
                ops.S(Eigen::Index(lr.index(i, j, k)), Eigen::Index(hr.index(i * d.r, j * d.c, k * d.s))) = 1.0;

    // h = H e_0 = F^H (Lambda / sqrt(N)); naive_dft is unitary so divide once more by sqrt(N).
    auto h = naive_dft(hr, kernel.values, +1);
    const double scale = 1.0 / std::sqrt(double(hr.size()));
    for (auto& v : h)
        v *= scale;

    ops.H = Matrix(Nh, Nh);
    for (std::size_t c3 = 0; c3 < hr.s; ++c3)
        for (std::size_t c2 = 0; c2 < hr.n; ++c2)
            for (std::size_t c1 = 0; c1 < hr.m; ++c1) {
                const auto col = Eigen::Index(hr.index(c1, c2, c3));
                for (std::size_t r3 = 0; r3 < hr.s; ++r3)
                    for (std::size_t r2 = 0; r2 < hr.n; ++r2)
                        for (std::size_t r1 = 0; r1 < hr.m; ++r1) {
                            const std::size_t src = hr.index((r1 + hr.m - c1) % hr.m, (r2 + hr.n - c2) % hr.n,
                                                             (r3 + hr.s - c3) % hr.s);
                            ops.H(Eigen::Index(hr.index(r1, r2, r3)), col) = h[src];
                        }
            }
    return ops;
}

inline DenseOperators build_dense(const Grid3& hr, const SolverConfig& cfg) {
    return build_dense(hr, cfg.kernel, cfg.d);
}

inline Vector to_vector(const ComplexVolume& v) {
    Vector out(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(Eigen::Index(i)) = v[i];
    return out;
}

inline ComplexVolume to_volume(const Vector& v, const Grid3& g) {
    ComplexVolume out(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        out[i] = v(Eigen::Index(i));
    return out;
}

/// S H x.
inline ComplexVolume apply(const DenseOperators& ops, const ComplexVolume& x) {
    return to_volume(ops.S.cast<complex_t>() * (ops.H * to_vector(x)), ops.lr);
}

/// H^H S^H S H + 2 tau I.
inline Matrix normal_matrix(const DenseOperators& ops, double tau) {
    const Matrix SH = ops.S.cast<complex_t>() * ops.H;
    Matrix A = SH.adjoint() * SH;
    A.diagonal().array() += 2.0 * tau;
    return A;
}

/// x = (H^H S^H S H + 2 tau I)^{-1} (H^H S^H y + 2 tau prior), by Cholesky of the dense HPD matrix.
inline ComplexVolume dense_solve(const ComplexVolume& y, const ComplexVolume& prior, const DenseOperators& ops,
                                 double tau) {
    if (!(tau > 0.0))
        throw ParameterError("tau must be > 0");
    require_same_shape(y, ops.lr, "dense_solve data");
    require_same_shape(prior, ops.hr, "dense_solve prior");
    const Matrix SH = ops.S.cast<complex_t>() * ops.H;
    const Matrix A = normal_matrix(ops, tau);
    const Vector b = SH.adjoint() * to_vector(y) + 2.0 * tau * to_vector(prior);
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw Error("dense normal matrix is not positive definite");
    return to_volume(llt.solve(b), ops.hr);
}

inline double relative_error(const ComplexVolume& a, const ComplexVolume& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += std::norm(a[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace flowsr::oracle
