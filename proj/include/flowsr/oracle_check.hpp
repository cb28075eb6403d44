#pragma once

#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "flowsr/dense_oracle.hpp"
#include "flowsr/fsr_solver.hpp"
#include "flowsr/spectral.hpp"

namespace flowsr::oracle {

/// i.i.d. standard complex normal samples, deterministic in seed.
inline ComplexVolume random_complex_volume(const Grid3& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ComplexVolume out(g);
    for (auto& v : out.data())
        v = complex_t(normal(rng), normal(rng));
    return out;
}

/// Kernel families exercised by the check. gaussian is the bare Gaussian response (nonzero
/// everywhere) with fwhm equal to half of each HR dimension.
inline KernelSpectrum check_kernel(KernelType type, const Grid3& hr, const Decimation& d) {
    if (type == KernelType::ideal)
        return ideal_lowpass_spectrum(hr, d);
    return gaussian_spectrum(hr, {0.5 * double(hr.m), 0.5 * double(hr.n), 0.5 * double(hr.s)});
}

struct CheckCase {
    Grid3 hr;
    Decimation d;
    KernelType kernel = KernelType::ideal;
    double tau = 0.05;
};

struct CheckResult {
    CheckCase config;
    double relative_error = 0.0;
    bool skipped = false;  // decimation does not divide the grid
};

struct CheckSummary {
    std::vector<CheckResult> results;
    double max_relative_error = 0.0;
    double tolerance = 1e-8;
    double seconds = 0.0;
    std::size_t failures = 0;  // includes NaN errors

    [[nodiscard]] bool passed() const { return failures == 0; }
};

/// Grid x decimation x kernel x tau product used when no explicit matrix is given.
inline std::vector<CheckCase> default_matrix() {
    const std::vector<Grid3> grids{Grid3(4, 4, 4), Grid3(6, 6, 6), Grid3(8, 8, 8), Grid3(8, 6, 4)};
    const std::vector<Decimation> rates{{2, 1, 1}, {2, 2, 1}, {2, 2, 2}};
    const std::vector<double> taus{1e-3, 0.05, 1.0};
    std::vector<CheckCase> out;
    for (const auto& g : grids)
        for (const auto& d : rates)
            for (KernelType k : {KernelType::ideal, KernelType::gaussian})
                for (double tau : taus)
                    out.push_back({g, d, k, tau});
    return out;
}

/// Runs the fast solver and the dense normal-equation solve on random data for every case.
/// shift_scale != 1 deliberately corrupts the fast solver (negative control).
inline CheckSummary run_oracle_check(const std::vector<CheckCase>& cases, double tolerance = 1e-8,
                                     double shift_scale = 1.0, std::uint64_t seed = 7) {
    CheckSummary summary;
    summary.tolerance = tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t case_seed = seed;
    for (const auto& c : cases) {
        CheckResult r{c, 0.0, false};
        if (c.hr.m % c.d.r || c.hr.n % c.d.c || c.hr.s % c.d.s) {
            r.skipped = true;
            summary.results.push_back(r);
            continue;
        }
        const Grid3 lr = decimate(c.hr, c.d);
        const SolverConfig cfg{c.tau, check_kernel(c.kernel, c.hr, c.d), c.d, PriorMode::trilinear};
        const ComplexVolume y = random_complex_volume(lr, ++case_seed);
        const ComplexVolume prior = random_complex_volume(c.hr, ++case_seed);

        FourierEngine fft;
        const ComplexVolume fast = FastSolver(cfg, shift_scale).solve(y, prior, fft);
        const ComplexVolume dense = dense_solve(y, prior, build_dense(c.hr, cfg), c.tau);
        r.relative_error = relative_error(fast, dense);
        if (!(r.relative_error <= tolerance))
            ++summary.failures;
        if (!(r.relative_error <= summary.max_relative_error))
            summary.max_relative_error = r.relative_error;
        summary.results.push_back(r);
    }
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

}  // namespace flowsr::oracle
