#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowsr/parallel.hpp"
#include "flowsr/spectral.hpp"
#include "flowsr/volume.hpp"

namespace flowsr {

enum class KernelType { ideal, gaussian };

inline const char* kernel_name(KernelType t) { return t == KernelType::ideal ? "ideal" : "gaussian"; }

inline KernelType parse_kernel(const std::string& s) {
    if (s == "ideal")
        return KernelType::ideal;
    if (s == "gaussian")
        return KernelType::gaussian;
    throw ParameterError("unknown kernel '" + s + "' (expected ideal|gaussian)");
}

/// Blur kernel selection. For gaussian, fwhm is in k-space bins per axis.
struct KernelChoice {
    KernelType type = KernelType::ideal;
    std::array<double, 3> fwhm{8.0, 8.0, 8.0};
};

/// Effective spectrum of H for a k-space truncation acquisition: the retained box, optionally
/// weighted by a Gaussian response. Anything outside the box is discarded by the truncation, so
/// the box is always part of the operator.
inline KernelSpectrum make_kernel(const Grid3& hr, const Decimation& d, const KernelChoice& k) {
    KernelSpectrum box = ideal_lowpass_spectrum(hr, d);
    if (k.type == KernelType::ideal)
        return box;
    return multiply(box, gaussian_spectrum(hr, k.fwhm));
}

struct DegradationConfig {
    Decimation d;
    KernelChoice kernel;
    std::optional<double> noise_psnr_db;  // absent: noiseless
    std::uint64_t rng_seed = 0;
};

inline void validate(const DegradationConfig& cfg) {
    validate(cfg.d);
    if (cfg.noise_psnr_db && !std::isfinite(*cfg.noise_psnr_db))
        throw ParameterError("noise PSNR target must be finite");
}

struct NoiseCalibration {
    double sigma = 0.0;  // std of each of the real/imaginary k-space noise components
    double peak = 0.0;   // max clean LR magnitude used as the PSNR reference
    std::optional<double> target_psnr_db;
    std::optional<double> achieved_psnr_db;
};

// ---------------------------------------------------------------------------
// y = S H x and its adjoint, evaluated in the Fourier domain

/// S H x for a HR signal, with H given by its spectrum and S keeping voxel 0 of each d-block.
/// Uses the alias sum F_l S F_h^H = (1/sqrt(d)) * fold.
inline ComplexVolume apply_SH(const ComplexVolume& x, const KernelSpectrum& kernel, const Decimation& d,
                              FourierEngine& fft) {
    const Grid3& hr = x.grid();
    const Grid3 lr = decimate(hr, d);
    require_spectrum(kernel, hr);
    ComplexVolume X = fft.forward(x);
    ComplexVolume Y(lr);
    for_each_alias(hr, lr, d, [&](std::size_t l, std::size_t, std::size_t h) { Y[l] += kernel.values[h] * X[h]; });
    const double scale = 1.0 / std::sqrt(double(d.total()));
    for (auto& v : Y.data())
        v *= scale;
    fft.inverse_inplace(lr, Y.data());
    return Y;
}

/// H^H S^H y: zero insertion followed by filtering with the conjugate kernel.
inline ComplexVolume apply_SH_adjoint(const ComplexVolume& y, const KernelSpectrum& kernel, const Decimation& d,
                                      FourierEngine& fft) {
    const Grid3& hr = kernel.grid;
    const Grid3 lr = decimate(hr, d);
    require_same_shape(y, lr, "apply_SH_adjoint");
    ComplexVolume Y = fft.forward(y);
    ComplexVolume X(hr);
    const double scale = 1.0 / std::sqrt(double(d.total()));
    for_each_alias(hr, lr, d,
                   [&](std::size_t l, std::size_t, std::size_t h) { X[h] = std::conj(kernel.values[h]) * Y[l] * scale; });
    fft.inverse_inplace(hr, X.data());
    return X;
}

inline ComplexVolume apply_SH(const ComplexVolume& x, const DegradationConfig& cfg) {
    FourierEngine fft;
    return apply_SH(x, make_kernel(x.grid(), cfg.d, cfg.kernel), cfg.d, fft);
}

inline ComplexVolume apply_SH_adjoint(const ComplexVolume& y, const Grid3& hr, const DegradationConfig& cfg) {
    FourierEngine fft;
    return apply_SH_adjoint(y, make_kernel(hr, cfg.d, cfg.kernel), cfg.d, fft);
}

// ---------------------------------------------------------------------------
// Noise

/// sigma such that complex white noise of std sigma per component gives PSNR = target on the
/// complex LR image, with peak = max clean magnitude: PSNR = 10 log10(peak^2 / (2 sigma^2)).
/// Under the unitary DFT the k-space std equals the spatial std.
inline NoiseCalibration calibrate_noise(const ScalarVolume& clean_lr_magnitude, double target_psnr_db,
                                        const Grid3& lr) {
    require_same_shape(clean_lr_magnitude, lr, "calibrate_noise");
    if (!std::isfinite(target_psnr_db))
        throw ParameterError("noise PSNR target must be finite");
    double peak = 0.0;
    for (double a : clean_lr_magnitude.data())
        peak = std::max(peak, std::abs(a));
    if (!(peak > 0.0))
        throw CalibrationError("cannot calibrate noise against an all-zero magnitude image");
    NoiseCalibration cal;
    cal.peak = peak;
    cal.target_psnr_db = target_psnr_db;
    cal.sigma = peak * std::pow(10.0, -target_psnr_db / 20.0) / std::sqrt(2.0);
    return cal;
}

/// Seed of the noise stream for one (frame, channel): seed mixed with both indices through splitmix64.
inline std::uint64_t noise_stream_seed(std::uint64_t seed, std::size_t frame, std::size_t channel) {
    std::uint64_t z = seed ^ (std::uint64_t(frame) * 0x9E3779B97F4A7C15ULL) ^ (std::uint64_t(channel + 1) * 0xD1B54A32D192ED03ULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Adds i.i.d. complex Gaussian noise, std sigma per component, to every bin.
inline void add_complex_noise(std::span<complex_t> data, double sigma, std::uint64_t stream_seed) {
    if (sigma <= 0.0)
        return;
    std::mt19937_64 rng(stream_seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& v : data) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += complex_t(re, im);
    }
}

// ---------------------------------------------------------------------------
// Simulated acquisition

struct DegradeResult {
    VelocityDataset lr;
    NoiseCalibration calibration;
};

/// Simulated low-resolution acquisition. Per frame and encoding direction:
/// synthesize A e^{i phi} -> FFT -> kernel weighting -> complex k-space noise on every HR bin
/// -> truncate to the LR box -> inverse FFT -> magnitude and velocity.
/// Noise is calibrated once per dataset against the largest clean LR magnitude; the LR
/// magnitude image is the u-channel magnitude.
inline DegradeResult degrade_dataset(const VelocityDataset& hr, const DegradationConfig& cfg) {
    validate(hr);
    validate(cfg);
    const Grid3 hr_grid = hr.grid();
    const Grid3 lr_grid = decimate(hr_grid, cfg.d);
    const KernelSpectrum kernel = make_kernel(hr_grid, cfg.d, cfg.kernel);
    const double venc = hr.params.venc;
    const std::size_t frames = hr.frames.size();

    // Weighted HR spectra; the clean LR signal is crop(spectrum), noise is added on top later.
    std::vector<ComplexVolume> spectra(frames * 3);
    std::vector<ComplexVolume> clean_lr(frames * 3);
    parallel_for(frames * 3, [&](std::size_t task) {
        FourierEngine fft;
        const VelocityFrame& f = hr.frames[task / 3];
        const Channel c = kChannels[task % 3];
        ComplexVolume X = fft.forward(synthesize_complex(f.magnitude, f.velocity(c), venc));
        for (std::size_t i = 0; i < X.size(); ++i)
            X[i] *= kernel.values[i];
        clean_lr[task] = fft.inverse(crop_kspace(X, lr_grid));
        spectra[task] = std::move(X);
    });

    DegradeResult result;
    if (cfg.noise_psnr_db) {
        ScalarVolume peak_map(lr_grid);
        for (const auto& y : clean_lr)
            for (std::size_t i = 0; i < y.size(); ++i)
                peak_map[i] = std::max(peak_map[i], std::abs(y[i]));
        result.calibration = calibrate_noise(peak_map, *cfg.noise_psnr_db, lr_grid);
    }

    std::vector<ComplexVolume> noisy_lr(frames * 3);
    std::vector<double> sq_err(frames * 3, 0.0);
    parallel_for(frames * 3, [&](std::size_t task) {
        FourierEngine fft;
        ComplexVolume& X = spectra[task];
        add_complex_noise(X.data(), result.calibration.sigma,
                          noise_stream_seed(cfg.rng_seed, task / 3, task % 3));
        noisy_lr[task] = fft.inverse(crop_kspace(X, lr_grid));
        X = ComplexVolume();
        double acc = 0.0;
        for (std::size_t i = 0; i < lr_grid.size(); ++i)
            acc += std::norm(noisy_lr[task][i] - clean_lr[task][i]);
        sq_err[task] = acc;
    });

    if (cfg.noise_psnr_db) {
        double total = 0.0;
        for (double e : sq_err)
            total += e;
        const double mse = total / double(frames * 3 * lr_grid.size());
        result.calibration.achieved_psnr_db = mse > 0.0 ? 10.0 * std::log10(result.calibration.peak *
                                                                              result.calibration.peak / mse)
                                                        : std::numeric_limits<double>::infinity();
    }

    result.lr.params = hr.params;
    result.lr.frames.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        VelocityFrame& out = result.lr.frames[f];
        for (Channel c : kChannels) {
            auto mv = extract_velocity(noisy_lr[f * 3 + std::size_t(c)], venc);
            if (c == Channel::u)
                out.magnitude = std::move(mv.magnitude);
            out.velocity(c) = std::move(mv.velocity);
        }
    }
    return result;
}

}  // namespace flowsr
