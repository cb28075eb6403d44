#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "flowsr/volume.hpp"

namespace flowsr {

namespace detail {
// FFTW's planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Unitary 3D DFT (1/sqrt(N) in both directions), DC-first ordering.
///
/// Plans are cached per lattice shape. One engine per thread: the cache is not synchronized,
/// only plan creation and destruction go through a process-wide lock.
class FourierEngine {
public:
    FourierEngine() = default;
    FourierEngine(const FourierEngine&) = delete;
    FourierEngine& operator=(const FourierEngine&) = delete;
    FourierEngine(FourierEngine&& o) noexcept : plans_(std::move(o.plans_)) { o.plans_.clear(); }
    FourierEngine& operator=(FourierEngine&&) = delete;

    ~FourierEngine() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        for (auto& [key, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

    [[nodiscard]] ComplexVolume forward(const ComplexVolume& x) { return transform(x, true); }
    [[nodiscard]] ComplexVolume inverse(const ComplexVolume& x) { return transform(x, false); }

    /// In-place variants on raw storage laid out on grid g.
    void forward_inplace(const Grid3& g, std::span<complex_t> data) { run(g, data, true); }
    void inverse_inplace(const Grid3& g, std::span<complex_t> data) { run(g, data, false); }

private:
    struct PlanPair {
        fftw_plan forward;
        fftw_plan backward;
    };
    using Key = std::tuple<std::size_t, std::size_t, std::size_t>;

    ComplexVolume transform(const ComplexVolume& x, bool fwd) {
        ComplexVolume out = x;
        run(out.grid(), out.data(), fwd);
        return out;
    }

    PlanPair& plans_for(const Grid3& g) {
        const Key key{g.m, g.n, g.s};
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        std::vector<complex_t> scratch(g.size());
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        // Row-major with the last index fastest: (z, y, x).
        const int n0 = int(g.s), n1 = int(g.n), n2 = int(g.m);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(detail::fftw_planner_mutex());
        PlanPair p{fftw_plan_dft_3d(n0, n1, n2, buf, buf, FFTW_FORWARD, flags),
                   fftw_plan_dft_3d(n0, n1, n2, buf, buf, FFTW_BACKWARD, flags)};
        return plans_.emplace(key, p).first->second;
    }

    void run(const Grid3& g, std::span<complex_t> data, bool fwd) {
        if (data.size() != g.size())
            throw DimensionError("FourierEngine: buffer does not match grid");
        PlanPair& p = plans_for(g);
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(fwd ? p.forward : p.backward, buf, buf);
        const double scale = 1.0 / std::sqrt(double(g.size()));
        for (auto& v : data)
            v *= scale;
    }

    std::map<Key, PlanPair> plans_;
};

inline ComplexVolume forward_fft(const ComplexVolume& x) {
    FourierEngine e;
    return e.forward(x);
}

inline ComplexVolume inverse_fft(const ComplexVolume& x) {
    FourierEngine e;
    return e.inverse(x);
}

// ---------------------------------------------------------------------------
// Frequency index conventions

/// Signed frequency of DFT bin k on an axis of length len: k for k < ceil(len/2), k - len otherwise.
inline long signed_frequency(std::size_t k, std::size_t len) noexcept {
    return (k < (len + 1) / 2) ? long(k) : long(k) - long(len);
}

/// Whether HR bin k lies in the retained low-frequency box of an axis cropped from hr_len to lr_len:
/// k in [0, ceil(L/2) - 1] or [hr_len - floor(L/2), hr_len - 1].
inline bool in_retained_box(std::size_t k, std::size_t hr_len, std::size_t lr_len) noexcept {
    return k < (lr_len + 1) / 2 || k >= hr_len - lr_len / 2;
}

/// LR bin corresponding to a retained HR bin. Equals k mod lr_len.
inline std::size_t retained_to_lr(std::size_t k, std::size_t hr_len, std::size_t lr_len) noexcept {
    return k < (lr_len + 1) / 2 ? k : k - hr_len + lr_len;
}

// ---------------------------------------------------------------------------
// Kernel spectra

/// Diagonal of the BCCB convolution operator in the Fourier basis (DC-first).
struct KernelSpectrum {
    Grid3 grid;
    std::vector<complex_t> values;

    [[nodiscard]] static KernelSpectrum identity(const Grid3& g) { return {g, std::vector<complex_t>(g.size(), 1.0)}; }
};

inline void require_spectrum(const KernelSpectrum& k, const Grid3& g) {
    if (!k.grid.same_shape(g) || k.values.size() != g.size())
        throw DimensionError("kernel spectrum grid " + to_string(k.grid) + " does not match " + to_string(g));
}

/// 1 on the retained low-frequency box of size (m/d_r, n/d_c, s/d_s), 0 elsewhere.
inline KernelSpectrum ideal_lowpass_spectrum(const Grid3& hr, const Decimation& d) {
    const Grid3 lr = decimate(hr, d);
    KernelSpectrum out{hr, std::vector<complex_t>(hr.size())};
    for (std::size_t k3 = 0; k3 < hr.s; ++k3) {
        const bool b3 = in_retained_box(k3, hr.s, lr.s);
        for (std::size_t k2 = 0; k2 < hr.n; ++k2) {
            const bool b2 = b3 && in_retained_box(k2, hr.n, lr.n);
            for (std::size_t k1 = 0; k1 < hr.m; ++k1)
                out.values[hr.index(k1, k2, k3)] = (b2 && in_retained_box(k1, hr.m, lr.m)) ? 1.0 : 0.0;
        }
    }
    return out;
}

/// Separable Gaussian frequency response exp(-4 ln2 (f / fwhm)^2), where f is the signed
/// frequency index and fwhm is the full width at half maximum measured in k-space bins.
inline KernelSpectrum gaussian_spectrum(const Grid3& hr, std::array<double, 3> fwhm_bins) {
    for (double f : fwhm_bins)
        if (!(f > 0.0))
            throw ParameterError("gaussian kernel fwhm must be positive");
    auto axis = [](std::size_t len, double fwhm) {
        std::vector<double> r(len);
        const double c = 4.0 * std::log(2.0) / (fwhm * fwhm);
        for (std::size_t k = 0; k < len; ++k) {
            const double f = double(std::min(k, len - k));
            r[k] = std::exp(-c * f * f);
        }
        return r;
    };
    const auto gx = axis(hr.m, fwhm_bins[0]);
    const auto gy = axis(hr.n, fwhm_bins[1]);
    const auto gz = axis(hr.s, fwhm_bins[2]);
    KernelSpectrum out{hr, std::vector<complex_t>(hr.size())};
    for (std::size_t k3 = 0; k3 < hr.s; ++k3)
        for (std::size_t k2 = 0; k2 < hr.n; ++k2)
            for (std::size_t k1 = 0; k1 < hr.m; ++k1)
                out.values[hr.index(k1, k2, k3)] = gx[k1] * gy[k2] * gz[k3];
    return out;
}

/// Pointwise product of two spectra on the same grid.
inline KernelSpectrum multiply(const KernelSpectrum& a, const KernelSpectrum& b) {
    require_spectrum(b, a.grid);
    KernelSpectrum out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] *= b.values[i];
    return out;
}

// ---------------------------------------------------------------------------
// Alias folding

/// The d aliased sub-blocks of a HR spectrum. Block b = b_r + d_r * (b_c + d_c * b_s) holds, at LR
/// frequency (k1, k2, k3), the HR value at (k1 + b_r * m_l, k2 + b_c * n_l, k3 + b_s * s_l).
struct FoldedSpectrum {
    Grid3 lr_grid;
    Decimation d;
    std::vector<ComplexVolume> blocks;
    ScalarVolume gram;  // sum over blocks of |block|^2
};

/// Calls fn(lr_index, block, hr_index) for every HR bin.
template <typename Fn>
void for_each_alias(const Grid3& hr, const Grid3& lr, const Decimation& d, Fn&& fn) {
    for (std::size_t bs = 0; bs < d.s; ++bs)
        for (std::size_t bc = 0; bc < d.c; ++bc)
            for (std::size_t br = 0; br < d.r; ++br) {
                const std::size_t b = br + d.r * (bc + d.c * bs);
                for (std::size_t k3 = 0; k3 < lr.s; ++k3)
                    for (std::size_t k2 = 0; k2 < lr.n; ++k2) {
                        const std::size_t lr_row = lr.index(0, k2, k3);
                        const std::size_t hr_row = hr.index(br * lr.m, k2 + bc * lr.n, k3 + bs * lr.s);
                        for (std::size_t k1 = 0; k1 < lr.m; ++k1)
                            fn(lr_row + k1, b, hr_row + k1);
                    }
            }
}

inline FoldedSpectrum fold_spectrum(const KernelSpectrum& spec, const Decimation& d) {
    const Grid3 lr = decimate(spec.grid, d);
    require_spectrum(spec, spec.grid);
    FoldedSpectrum out{lr, d, std::vector<ComplexVolume>(d.total(), ComplexVolume(lr)), ScalarVolume(lr)};
    for_each_alias(spec.grid, lr, d, [&](std::size_t l, std::size_t b, std::size_t h) {
        out.blocks[b][l] = spec.values[h];
        out.gram[l] += std::norm(spec.values[h]);
    });
    return out;
}

// ---------------------------------------------------------------------------
// k-space cropping and zero padding

namespace detail {
template <typename Fn>
void for_each_retained(const Grid3& hr, const Grid3& lr, Fn&& fn) {
    for (std::size_t k3 = 0; k3 < hr.s; ++k3) {
        if (!in_retained_box(k3, hr.s, lr.s))
            continue;
        const std::size_t l3 = retained_to_lr(k3, hr.s, lr.s);
        for (std::size_t k2 = 0; k2 < hr.n; ++k2) {
            if (!in_retained_box(k2, hr.n, lr.n))
                continue;
            const std::size_t l2 = retained_to_lr(k2, hr.n, lr.n);
            for (std::size_t k1 = 0; k1 < hr.m; ++k1) {
                if (!in_retained_box(k1, hr.m, lr.m))
                    continue;
                fn(lr.index(retained_to_lr(k1, hr.m, lr.m), l2, l3), hr.index(k1, k2, k3));
            }
        }
    }
}

inline void require_not_larger(const Grid3& lr, const Grid3& hr) {
    if (lr.m > hr.m || lr.n > hr.n || lr.s > hr.s)
        throw ParameterError("low-resolution grid " + to_string(lr) + " exceeds " + to_string(hr));
}
}  // namespace detail

/// Copies the retained low-frequency box of a HR spectrum into an LR spectrum.
inline ComplexVolume crop_kspace(const ComplexVolume& hr_spectrum, const Grid3& lr) {
    detail::require_not_larger(lr, hr_spectrum.grid());
    ComplexVolume out(lr);
    detail::for_each_retained(hr_spectrum.grid(), lr, [&](std::size_t l, std::size_t h) { out[l] = hr_spectrum[h]; });
    return out;
}

/// Adjoint of crop_kspace: places an LR spectrum in the retained box, zeros elsewhere.
inline ComplexVolume zero_pad_kspace(const ComplexVolume& lr_spectrum, const Grid3& hr) {
    detail::require_not_larger(lr_spectrum.grid(), hr);
    ComplexVolume out(hr);
    detail::for_each_retained(hr, lr_spectrum.grid(), [&](std::size_t l, std::size_t h) { out[h] = lr_spectrum[l]; });
    return out;
}

}  // namespace flowsr
