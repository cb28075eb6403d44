#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "flowsr/forward_model.hpp"
#include "flowsr/interp.hpp"
#include "flowsr/parallel.hpp"
#include "flowsr/spectral.hpp"
#include "flowsr/volume.hpp"

namespace flowsr {

enum class PriorMode { trilinear, zero_fill };

inline const char* prior_name(PriorMode p) { return p == PriorMode::trilinear ? "trilinear" : "zero-fill"; }

inline PriorMode parse_prior(const std::string& s) {
    if (s == "trilinear")
        return PriorMode::trilinear;
    if (s == "zero-fill" || s == "zerofill")
        return PriorMode::zero_fill;
    throw ParameterError("unknown prior mode '" + s + "' (expected trilinear|zero-fill)");
}

inline constexpr double kDefaultTau = 1.0;

/// Tikhonov problem  min_x 1/2 ||y - S H x||^2 + tau ||x - prior||^2  on one HR grid.
struct SolverConfig {
    double tau = kDefaultTau;
    KernelSpectrum kernel;  // spectrum of H on the HR grid
    Decimation d;
    PriorMode prior = PriorMode::trilinear;
};

inline void validate(const SolverConfig& cfg) {
    if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau))
        throw ParameterError("tau must be > 0, got " + std::to_string(cfg.tau));
    validate(cfg.d);
    decimate(cfg.kernel.grid, cfg.d);
    require_spectrum(cfg.kernel, cfg.kernel.grid);
}

inline SolverConfig make_solver_config(const Grid3& hr, const Decimation& d, const KernelChoice& kernel,
                                       double tau = kDefaultTau, PriorMode prior = PriorMode::trilinear) {
    return SolverConfig{tau, make_kernel(hr, d, kernel), d, prior};
}

struct SolveReport {
    double residual = 0.0;        // ||y - S H x||
    double prior_distance = 0.0;  // ||x - prior||
    double objective = 0.0;
    double wall_seconds = 0.0;
};

/// Rough HR estimate: componentwise trilinear interpolation, or sqrt(d) * zero-padded spectrum.
inline ComplexVolume build_prior(const ComplexVolume& y, const Decimation& d, PriorMode mode) {
    validate(d);
    switch (mode) {
        case PriorMode::trilinear:
            return upsample(y, d, InterpMethod::trilinear);
        case PriorMode::zero_fill: {
            FourierEngine fft;
            const Grid3 hr = upscale(y.grid(), d);
            ComplexVolume x = fft.inverse(zero_pad_kspace(fft.forward(y), hr));
            const double scale = std::sqrt(double(d.total()));
            for (auto& v : x.data())
                v *= scale;
            return x;
        }
    }
    throw ParameterError("unknown prior mode");
}

/// k = H^H S^H y + 2 tau prior.
inline ComplexVolume compute_k(const ComplexVolume& y, const ComplexVolume& prior, const SolverConfig& cfg) {
    validate(cfg);
    require_same_shape(prior, cfg.kernel.grid, "compute_k prior");
    FourierEngine fft;
    ComplexVolume k = apply_SH_adjoint(y, cfg.kernel, cfg.d, fft);
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] += 2.0 * cfg.tau * prior[i];
    return k;
}

/// Closed-form minimizer of the Tikhonov problem.
///
/// With F unitary and F_l S F_h^H = fold / sqrt(d), the normal matrix in the Fourier basis is
/// (1/d) L^H L + 2 tau I, where L (N_l x N_h) places the kernel value of every alias of an LR
/// frequency on that frequency's row. The Woodbury identity turns its inverse into
///   (1/(2 tau)) [I - L^H (2 tau d I + L L^H)^{-1} L],
/// and L L^H is diagonal (the folded gram), so the whole solve is pointwise between one HR
/// forward and one HR inverse FFT.
class FastSolver {
public:
    /// shift_scale multiplies the 2 tau d shift of the diagonal inverse. Anything other than 1 gives
    /// a wrong solver; it exists so verification tooling can check that it notices.
    explicit FastSolver(SolverConfig cfg, double shift_scale = 1.0) : cfg_(std::move(cfg)), shift_scale_(shift_scale) {
        validate(cfg_);
        hr_ = cfg_.kernel.grid;
        lr_ = decimate(hr_, cfg_.d);
        gram_ = fold_spectrum(cfg_.kernel, cfg_.d).gram;
    }

    [[nodiscard]] const SolverConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const Grid3& hr_grid() const noexcept { return hr_; }
    [[nodiscard]] const Grid3& lr_grid() const noexcept { return lr_; }

    /// Solves with the prior built from y according to the configured mode.
    ComplexVolume solve(const ComplexVolume& y, FourierEngine& fft, SolveReport* report = nullptr) const {
        return solve(y, build_prior(y, cfg_.d, cfg_.prior), fft, report);
    }

    ComplexVolume solve(const ComplexVolume& y, const ComplexVolume& prior, FourierEngine& fft,
                        SolveReport* report = nullptr) const {
        require_same_shape(y, lr_, "fsr_solve data");
        require_same_shape(prior, hr_, "fsr_solve prior");
        const auto t0 = std::chrono::steady_clock::now();
        const double tau = cfg_.tau;
        const double d = double(cfg_.d.total());
        const double inv_sqrt_d = 1.0 / std::sqrt(d);
        const auto& lambda = cfg_.kernel.values;

        ComplexVolume Y = fft.forward(y);
        ComplexVolume P = fft.forward(prior);

        // F k = conj(Lambda) * Y(alias) / sqrt(d) + 2 tau F prior
        ComplexVolume K(hr_);
        for_each_alias(hr_, lr_, cfg_.d, [&](std::size_t l, std::size_t, std::size_t h) {
            K[h] = std::conj(lambda[h]) * Y[l] * inv_sqrt_d + 2.0 * tau * P[h];
        });

        // w = (2 tau d + gram)^{-1} L K
        ComplexVolume w(lr_);
        for_each_alias(hr_, lr_, cfg_.d, [&](std::size_t l, std::size_t, std::size_t h) { w[l] += lambda[h] * K[h]; });
        for (std::size_t l = 0; l < w.size(); ++l)
            w[l] /= 2.0 * tau * d * shift_scale_ + gram_[l];

        // X = (K - L^H w) / (2 tau)
        const double inv_2tau = 1.0 / (2.0 * tau);
        ComplexVolume X(hr_);
        for_each_alias(hr_, lr_, cfg_.d, [&](std::size_t l, std::size_t, std::size_t h) {
            X[h] = (K[h] - std::conj(lambda[h]) * w[l]) * inv_2tau;
        });

        if (report) {
            // Parseval: residual and prior distance straight from the spectra.
            ComplexVolume SHX(lr_);
            for_each_alias(hr_, lr_, cfg_.d,
                           [&](std::size_t l, std::size_t, std::size_t h) { SHX[l] += lambda[h] * X[h]; });
            double res2 = 0.0;
            for (std::size_t l = 0; l < lr_.size(); ++l)
                res2 += std::norm(Y[l] - SHX[l] * inv_sqrt_d);
            double dist2 = 0.0;
            for (std::size_t h = 0; h < hr_.size(); ++h)
                dist2 += std::norm(X[h] - P[h]);
            report->residual = std::sqrt(res2);
            report->prior_distance = std::sqrt(dist2);
            report->objective = 0.5 * res2 + tau * dist2;
        }

        fft.inverse_inplace(hr_, X.data());
        if (report)
            report->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return X;
    }

private:
    SolverConfig cfg_;
    double shift_scale_ = 1.0;
    Grid3 hr_;
    Grid3 lr_;
    ScalarVolume gram_;
};

struct SolveResult {
    ComplexVolume x;
    SolveReport report;
};

inline SolveResult fsr_solve(const ComplexVolume& y, const SolverConfig& cfg) {
    FastSolver solver(cfg);
    FourierEngine fft;
    SolveResult r;
    r.x = solver.solve(y, fft, &r.report);
    return r;
}

inline SolveResult fsr_solve(const ComplexVolume& y, const ComplexVolume& prior, const SolverConfig& cfg) {
    FastSolver solver(cfg);
    FourierEngine fft;
    SolveResult r;
    r.x = solver.solve(y, prior, fft, &r.report);
    return r;
}

/// Objective of the Tikhonov problem, evaluated through the fast operators.
inline double objective(const ComplexVolume& x, const ComplexVolume& y, const ComplexVolume& prior,
                        const SolverConfig& cfg) {
    FourierEngine fft;
    const ComplexVolume shx = apply_SH(x, cfg.kernel, cfg.d, fft);
    double res2 = 0.0, dist2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        res2 += std::norm(y[i] - shx[i]);
    for (std::size_t i = 0; i < x.size(); ++i)
        dist2 += std::norm(x[i] - prior[i]);
    return 0.5 * res2 + cfg.tau * dist2;
}

/// ||H^H S^H (S H x - y) + 2 tau (x - prior)|| / ||H^H S^H y||; zero at the exact minimizer.
inline double normal_equation_residual(const ComplexVolume& x, const ComplexVolume& y, const ComplexVolume& prior,
                                       const SolverConfig& cfg) {
    FourierEngine fft;
    ComplexVolume r = apply_SH(x, cfg.kernel, cfg.d, fft);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] -= y[i];
    ComplexVolume g = apply_SH_adjoint(r, cfg.kernel, cfg.d, fft);
    const ComplexVolume hy = apply_SH_adjoint(y, cfg.kernel, cfg.d, fft);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        num += std::norm(g[i] + 2.0 * cfg.tau * (x[i] - prior[i]));
        den += std::norm(hy[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

struct SuperResolveResult {
    VelocityDataset hr;
    std::vector<SolveReport> reports;  // frame-major, then u, v, w
};

/// Per frame and encoding direction: A e^{i pi v / venc} from the LR images, closed-form solve,
/// then magnitude and velocity of the HR estimate. The HR magnitude comes from the u channel.
inline SuperResolveResult superresolve_dataset(const VelocityDataset& lr, const SolverConfig& cfg,
                                               const Grid3& hr_grid) {
    validate(lr);
    const Grid3 lr_grid = lr.grid();
    if (!upscale(lr_grid, cfg.d).same_shape(hr_grid) || !cfg.kernel.grid.same_shape(hr_grid))
        throw DimensionError("hr grid " + to_string(hr_grid) + " is not the LR grid " + to_string(lr_grid) +
                             " scaled by " + to_string(cfg.d));
    const FastSolver solver(cfg);
    const double venc = lr.params.venc;
    const std::size_t frames = lr.frames.size();

    std::vector<MagnitudeVelocity> out(frames * 3);
    std::vector<SolveReport> reports(frames * 3);
    parallel_for(frames * 3, [&](std::size_t task) {
        const std::size_t f = task / 3;
        const Channel c = kChannels[task % 3];
        try {
            FourierEngine fft;
            const VelocityFrame& fr = lr.frames[f];
            const ComplexVolume y = synthesize_complex(fr.magnitude, fr.velocity(c), venc, AliasPolicy::allow_bound);
            ComplexVolume x = solver.solve(y, fft, &reports[task]);
            out[task] = extract_velocity(x, venc);
        } catch (const Error& e) {
            throw Error("frame " + std::to_string(f) + ", channel " + channel_name(c) + ": " + e.what());
        }
    });

    SuperResolveResult result;
    result.hr.params = lr.params;
    result.hr.frames.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        VelocityFrame& fr = result.hr.frames[f];
        for (Channel c : kChannels) {
            MagnitudeVelocity& mv = out[f * 3 + std::size_t(c)];
            Grid3 g = hr_grid;
            if (c == Channel::u)
                fr.magnitude = ScalarVolume(g, std::move(mv.magnitude.storage()));
            fr.velocity(c) = ScalarVolume(g, std::move(mv.velocity.storage()));
        }
    }
    result.reports = std::move(reports);
    return result;
}

}  // namespace flowsr
