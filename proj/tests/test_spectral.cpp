#include <gtest/gtest.h>

#include <algorithm>

#include "flowsr/spectral.hpp"
#include "test_util.hpp"

using namespace flowsr;
using test::random_complex;
using test::rel_diff;

namespace {

const std::vector<Grid3> kParityGrids{Grid3(4, 4, 4), Grid3(5, 3, 7), Grid3(6, 5, 4), Grid3(1, 7, 2), Grid3(9, 1, 1)};

}  // namespace

TEST(Fourier, ConstantGoesToDc) {
    const Grid3 g(4, 6, 5);
    const auto X = forward_fft(ComplexVolume(g, 2.0));
    EXPECT_NEAR(std::abs(X[0] - complex_t(2.0 * std::sqrt(120.0))), 0.0, 1e-12);
    for (std::size_t i = 1; i < X.size(); ++i)
        EXPECT_LT(std::abs(X[i]), 1e-12);
}

TEST(Fourier, ImpulseGivesFlatSpectrum) {
    const Grid3 g(3, 4, 5);
    ComplexVolume x(g);
    x[0] = 1.0;
    const auto fx = forward_fft(x);
    for (auto v : fx.data())
        EXPECT_NEAR(std::abs(v - complex_t(1.0 / std::sqrt(60.0))), 0.0, 1e-14);
}

TEST(Fourier, MatchesDirectDftForAllParities) {
    for (const auto& g : kParityGrids) {
        const auto x = random_complex(g, g.size());
        EXPECT_LE(rel_diff(forward_fft(x), test::brute_dft(x, -1)), 1e-12) << to_string(g);
        EXPECT_LE(rel_diff(inverse_fft(x), test::brute_dft(x, +1)), 1e-12) << to_string(g);
    }
}

TEST(Fourier, UnitaryAndParseval) {
    FourierEngine fft;
    for (const auto& g : kParityGrids) {
        const auto x = random_complex(g, 3 + g.size());
        const auto X = fft.forward(x);
        EXPECT_NEAR(test::norm2(X), test::norm2(x), 1e-12 * test::norm2(x));
        EXPECT_LE(rel_diff(fft.inverse(X), x), 1e-12);
    }
}

TEST(Fourier, InverseOfDcIsConstantAndLinear) {
    const Grid3 g(4, 4, 2);
    ComplexVolume X(g);
    X[0] = complex_t(4.0 * std::sqrt(32.0), 0.0);
    const auto ix = inverse_fft(X);
    for (auto v : ix.data())
        EXPECT_NEAR(std::abs(v - complex_t(4.0)), 0.0, 1e-12);

    const auto a = random_complex(g, 1), b = random_complex(g, 2);
    const complex_t ca(0.3, -1.2), cb(2.0, 0.5);
    ComplexVolume lin(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        lin[i] = ca * a[i] + cb * b[i];
    const auto ia = inverse_fft(a), ib = inverse_fft(b), il = inverse_fft(lin);
    ComplexVolume expect(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        expect[i] = ca * ia[i] + cb * ib[i];
    EXPECT_LE(rel_diff(il, expect), 1e-13);
}

TEST(Fourier, EngineReusesPlansAcrossShapes) {
    FourierEngine fft;
    for (int rep = 0; rep < 3; ++rep)
        for (const auto& g : kParityGrids) {
            const auto x = random_complex(g, rep);
            EXPECT_LE(rel_diff(fft.inverse(fft.forward(x)), x), 1e-12);
        }
}

TEST(Frequency, RetainedBoxPerAxis) {
    // L = 4 out of 8: two nonnegative and two negative frequencies.
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < 8; ++k)
        if (in_retained_box(k, 8, 4))
            kept.push_back(k);
    EXPECT_EQ(kept, (std::vector<std::size_t>{0, 1, 6, 7}));
    // L = 3 out of 9: {0, 1} and {8}.
    kept.clear();
    for (std::size_t k = 0; k < 9; ++k)
        if (in_retained_box(k, 9, 3))
            kept.push_back(k);
    EXPECT_EQ(kept, (std::vector<std::size_t>{0, 1, 8}));
    for (std::size_t k : kept)
        EXPECT_EQ(retained_to_lr(k, 9, 3), k % 3);
    EXPECT_EQ(signed_frequency(5, 8), -3);
    EXPECT_EQ(signed_frequency(3, 8), 3);
}

TEST(IdealLowpass, Examples) {
    const auto id = ideal_lowpass_spectrum(Grid3(4, 6, 2), {1, 1, 1});
    for (auto v : id.values)
        EXPECT_EQ(v, complex_t(1.0));

    const auto one_d = ideal_lowpass_spectrum(Grid3(8, 1, 1), {2, 1, 1});
    std::vector<std::size_t> ones;
    for (std::size_t k = 0; k < 8; ++k)
        if (one_d.values[k] == complex_t(1.0))
            ones.push_back(k);
    EXPECT_EQ(ones, (std::vector<std::size_t>{0, 1, 6, 7}));

    for (const auto& [g, d] : {std::pair{Grid3(8, 4, 4), Decimation{2, 2, 2}}, std::pair{Grid3(9, 6, 4), Decimation{3, 2, 4}},
                               std::pair{Grid3(12, 5, 3), Decimation{4, 5, 1}}}) {
        const auto spec = ideal_lowpass_spectrum(g, d);
        const auto count = std::count(spec.values.begin(), spec.values.end(), complex_t(1.0));
        EXPECT_EQ(std::size_t(count), g.size() / d.total());
    }
}

TEST(IdealLowpass, IsAnOrthogonalProjection) {
    const Grid3 g(8, 6, 4);
    const auto spec = ideal_lowpass_spectrum(g, {2, 3, 2});
    FourierEngine fft;
    auto apply = [&](const ComplexVolume& x) {
        auto X = fft.forward(x);
        for (std::size_t i = 0; i < X.size(); ++i)
            X[i] *= spec.values[i];
        return fft.inverse(X);
    };
    const auto x = random_complex(g, 5), y = random_complex(g, 6);
    EXPECT_LE(rel_diff(apply(apply(x)), apply(x)), 1e-13);
    const complex_t lhs = test::inner(apply(x), y), rhs = test::inner(x, apply(y));
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
}

TEST(Gaussian, Examples) {
    const Grid3 g(8, 7, 6);
    const auto spec = gaussian_spectrum(g, {3.0, 2.0, 5.0});
    EXPECT_EQ(spec.values[0], complex_t(1.0));
    for (std::size_t k3 = 0; k3 < g.s; ++k3)
        for (std::size_t k2 = 0; k2 < g.n; ++k2)
            for (std::size_t k1 = 0; k1 < g.m; ++k1) {
                const auto neg = g.index((g.m - k1) % g.m, (g.n - k2) % g.n, (g.s - k3) % g.s);
                EXPECT_EQ(spec.values[g.index(k1, k2, k3)], spec.values[neg]);
            }
    // Half maximum at half the FWHM.
    const auto line = gaussian_spectrum(Grid3(16, 1, 1), {4.0, 1.0, 1.0});
    EXPECT_NEAR(line.values[2].real(), 0.5, 1e-15);

    const auto wide = gaussian_spectrum(g, {1e9, 1e9, 1e9});
    for (auto v : wide.values)
        EXPECT_NEAR(v.real(), 1.0, 1e-12);
    EXPECT_THROW(gaussian_spectrum(g, {1.0, 0.0, 1.0}), ParameterError);
}

TEST(Fold, IdentityOneDimensional) {
    const Grid3 hr(4, 1, 1);
    const auto f = fold_spectrum(KernelSpectrum::identity(hr), {2, 1, 1});
    ASSERT_EQ(f.blocks.size(), 2u);
    for (const auto& b : f.blocks)
        for (auto v : b.data())
            EXPECT_EQ(v, complex_t(1.0));
    for (double v : f.gram.data())
        EXPECT_EQ(v, 2.0);
}

TEST(Fold, IdealLowpassKeepsExactlyOneAliasPerBin) {
    for (const auto& [g, d] : {std::pair{Grid3(8, 4, 4), Decimation{2, 2, 2}}, std::pair{Grid3(8, 4, 4), Decimation{4, 1, 2}},
                               std::pair{Grid3(9, 6, 5), Decimation{3, 2, 5}}}) {
        const auto f = fold_spectrum(ideal_lowpass_spectrum(g, d), d);
        for (double v : f.gram.data())
            EXPECT_EQ(v, 1.0);
        // Brute force: every LR bin l has exactly one HR bin k = l (mod L) inside the box.
        const Grid3 lr = decimate(g, d);
        for (std::size_t l3 = 0; l3 < lr.s; ++l3)
            for (std::size_t l2 = 0; l2 < lr.n; ++l2)
                for (std::size_t l1 = 0; l1 < lr.m; ++l1) {
                    int hits = 0;
                    for (std::size_t k3 = l3; k3 < g.s; k3 += lr.s)
                        for (std::size_t k2 = l2; k2 < g.n; k2 += lr.n)
                            for (std::size_t k1 = l1; k1 < g.m; k1 += lr.m)
                                hits += in_retained_box(k1, g.m, lr.m) && in_retained_box(k2, g.n, lr.n) &&
                                        in_retained_box(k3, g.s, lr.s);
                    EXPECT_EQ(hits, 1);
                }
    }
}

TEST(Fold, TrivialDecimationAndBijectivity) {
    const Grid3 g(6, 4, 3);
    KernelSpectrum spec{g, {}};
    const auto r = random_complex(g, 9);
    spec.values.assign(r.data().begin(), r.data().end());

    const auto f1 = fold_spectrum(spec, {1, 1, 1});
    ASSERT_EQ(f1.blocks.size(), 1u);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(f1.blocks[0][i], spec.values[i]);
        EXPECT_NEAR(f1.gram[i], std::norm(spec.values[i]), 1e-15);
    }

    auto key = [](complex_t z) { return std::pair{z.real(), z.imag()}; };
    const auto f = fold_spectrum(spec, {2, 2, 3});
    std::vector<std::pair<double, double>> folded, orig;
    for (const auto& b : f.blocks)
        for (auto v : b.data())
            folded.push_back(key(v));
    for (auto v : spec.values)
        orig.push_back(key(v));
    std::sort(folded.begin(), folded.end());
    std::sort(orig.begin(), orig.end());
    EXPECT_EQ(folded, orig);
}

TEST(Crop, IdentityWhenSameGrid) {
    const Grid3 g(5, 4, 3);
    const auto X = random_complex(g, 1);
    EXPECT_EQ(rel_diff(crop_kspace(X, g), X), 0.0);
}

TEST(Crop, PadIsAdjointAndRightInverse) {
    const Grid3 hr(9, 8, 5), lr(3, 4, 5);
    const auto X = random_complex(hr, 2);
    const auto Y = random_complex(lr, 3);
    EXPECT_EQ(rel_diff(crop_kspace(zero_pad_kspace(Y, hr), lr), Y), 0.0);
    const auto c = crop_kspace(X, lr);
    EXPECT_EQ(rel_diff(crop_kspace(zero_pad_kspace(c, hr), lr), c), 0.0);
    const complex_t lhs = test::inner(crop_kspace(X, lr), Y), rhs = test::inner(X, zero_pad_kspace(Y, hr));
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
    const auto padded = zero_pad_kspace(ComplexVolume(lr), hr);
    for (auto v : padded.data())
        EXPECT_EQ(v, complex_t{});
}

TEST(Crop, ConstantVolumeScalesByVoxelRatio) {
    // A constant c on N_h voxels has DC value c sqrt(N_h); after cropping and an N_l-point inverse
    // transform the constant becomes c sqrt(N_h / N_l).
    const Grid3 hr(8, 6, 4), lr(4, 3, 2);
    const auto lo = inverse_fft(crop_kspace(forward_fft(ComplexVolume(hr, 1.5)), lr));
    for (auto v : lo.data())
        EXPECT_NEAR(std::abs(v - complex_t(1.5 * std::sqrt(8.0))), 0.0, 1e-12);
}

TEST(Crop, RejectsLargerTarget) {
    EXPECT_THROW(crop_kspace(ComplexVolume(Grid3(4, 4, 4)), Grid3(8, 4, 4)), ParameterError);
    EXPECT_THROW(zero_pad_kspace(ComplexVolume(Grid3(8, 4, 4)), Grid3(4, 4, 4)), ParameterError);
}
