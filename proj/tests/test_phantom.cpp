#include <gtest/gtest.h>

#include "flowsr/phantom.hpp"

using namespace flowsr;

TEST(Waveform, PositiveAndBounded) {
    const auto w = pulsatile_waveform(100.0, 5);
    ASSERT_EQ(w.size(), 5u);
    EXPECT_DOUBLE_EQ(w[0], 60.0);
    for (double v : w) {
        EXPECT_GE(v, 20.0);
        EXPECT_LE(v, 100.0);
    }
}

TEST(Poiseuille, CenterlineAndWall) {
    const Grid3 g(9, 9, 4);  // odd transverse size: a voxel sits on the axis
    PoiseuilleParams p;
    p.radius_voxels = 4.0;
    p.v_max = {80.0, 40.0};
    const auto ds = poiseuille_phantom(g, p);
    ASSERT_EQ(ds.frames.size(), 2u);
    for (std::size_t f = 0; f < 2; ++f) {
        const auto& fr = ds.frames[f];
        EXPECT_DOUBLE_EQ(fr.w(4, 4, 2), p.v_max[f]);
        EXPECT_EQ(fr.w(0, 4, 1), 0.0);  // r = R exactly
        EXPECT_EQ(fr.magnitude(0, 4, 1), p.magnitude_out);
        EXPECT_EQ(fr.magnitude(4, 4, 1), p.magnitude_in);
        for (double v : fr.u.data())
            EXPECT_EQ(v, 0.0);
        for (double v : fr.v.data())
            EXPECT_EQ(v, 0.0);
    }
}

TEST(Poiseuille, MeanAxialVelocityIsHalfPeak) {
    const Grid3 g(64, 64, 64);
    PoiseuilleParams p;
    p.radius_voxels = 19.2;
    p.v_max = {100.0};
    const auto ds = poiseuille_phantom(g, p);
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (ds.frames[0].magnitude[i] > 0.0) {
            acc += ds.frames[0].w[i];
            ++n;
        }
    EXPECT_NEAR(acc / double(n), 50.0, 0.05 * 50.0);
}

TEST(Poiseuille, AxisSelection) {
    const Grid3 g(4, 9, 9);
    PoiseuilleParams p;
    p.radius_voxels = 4.0;
    p.axis = 0;
    p.v_max = {30.0};
    const auto ds = poiseuille_phantom(g, p);
    EXPECT_DOUBLE_EQ(ds.frames[0].u(2, 4, 4), 30.0);
    for (double v : ds.frames[0].w.data())
        EXPECT_EQ(v, 0.0);
}

TEST(Poiseuille, Preconditions) {
    const Grid3 g(16, 16, 4);
    PoiseuilleParams p;
    p.radius_voxels = 9.0;
    EXPECT_THROW(poiseuille_phantom(g, p), ParameterError);
    p.radius_voxels = 5.0;
    p.v_max = {50.0, 150.0};
    p.venc = 150.0;
    EXPECT_THROW(poiseuille_phantom(g, p), AliasingError);
    p.v_max = {};
    EXPECT_THROW(poiseuille_phantom(g, p), ParameterError);
}

TEST(Poiseuille, Deterministic) {
    const Grid3 g(12, 10, 3);
    PoiseuilleParams p;
    p.radius_voxels = 4.5;
    const auto a = poiseuille_phantom(g, p), b = poiseuille_phantom(g, p);
    EXPECT_EQ(a.frames[0].w.storage(), b.frames[0].w.storage());
}

TEST(Helix, AxisHasNoTransverseFlow) {
    const Grid3 g(11, 11, 4);
    HelixParams p;
    p.radius_voxels = 5.0;
    const auto ds = helix_phantom(g, p);
    const auto& f = ds.frames[0];
    EXPECT_EQ(f.u(5, 5, 1), 0.0);
    EXPECT_EQ(f.v(5, 5, 1), 0.0);
    EXPECT_DOUBLE_EQ(f.w(5, 5, 1), p.v_axial[0]);
    bool u_nonzero = false, v_nonzero = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        u_nonzero |= f.u[i] != 0.0;
        v_nonzero |= f.v[i] != 0.0;
    }
    EXPECT_TRUE(u_nonzero && v_nonzero);
}

TEST(Helix, DiscretelyDivergenceFree) {
    const Grid3 g(48, 48, 6);
    HelixParams p;
    p.radius_voxels = 20.0;
    p.v_axial = {80.0};
    p.swirl_ratio = 0.8;
    const auto ds = helix_phantom(g, p);
    const auto& f = ds.frames[0];
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 1; k + 1 < g.s; ++k)
        for (std::size_t j = 1; j + 1 < g.n; ++j)
            for (std::size_t i = 1; i + 1 < g.m; ++i) {
                const double x = double(i) - 23.5, y = double(j) - 23.5;
                if (std::hypot(x, y) > p.radius_voxels - 1.5)
                    continue;  // central differences straddle the wall there
                const double div = 0.5 * (f.u(i + 1, j, k) - f.u(i - 1, j, k)) + 0.5 * (f.v(i, j + 1, k) - f.v(i, j - 1, k)) +
                                   0.5 * (f.w(i, j, k + 1) - f.w(i, j, k - 1));
                const double grad = 0.5 * std::abs(f.u(i + 1, j, k) - f.u(i - 1, j, k));
                worst = std::max(worst, std::abs(div));
                scale = std::max(scale, grad);
            }
    EXPECT_LT(worst, 0.02 * scale);
}

TEST(Helix, SpeedsStayBelowVenc) {
    const Grid3 g(24, 24, 2);
    HelixParams p;
    p.radius_voxels = 10.0;
    p.v_axial = {100.0};
    p.swirl_ratio = 0.5;
    p.venc = 150.0;
    const auto ds = helix_phantom(g, p);
    for (const auto& f : ds.frames)
        for (Channel c : kChannels)
            for (double v : f.velocity(c).data())
                EXPECT_LT(std::abs(v), p.venc);
    p.v_axial = {100.0};
    p.venc = 90.0;
    EXPECT_THROW(helix_phantom(g, p), AliasingError);
}
