#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "flowsr/dense_oracle.hpp"
#include "flowsr/oracle_check.hpp"
#include "test_util.hpp"

using namespace flowsr;
using namespace flowsr::oracle;
using test::random_complex;

TEST(DenseOperators, TrivialCases) {
    const Grid3 g(4, 3, 2);
    const auto ops = build_dense(g, KernelSpectrum::identity(g), {1, 1, 1});
    EXPECT_TRUE(ops.S.isIdentity());
    EXPECT_LE((ops.H - Matrix::Identity(g.size(), g.size())).norm(), 1e-12);
}

TEST(DenseOperators, SelectionStructure) {
    const Grid3 g(6, 4, 4);
    const Decimation d{3, 2, 2};
    const auto ops = build_dense(g, ideal_lowpass_spectrum(g, d), d);
    const Eigen::MatrixXd StS = ops.S.transpose() * ops.S;
    EXPECT_TRUE(StS.isApprox(Eigen::MatrixXd(StS.diagonal().asDiagonal())));
    for (Eigen::Index i = 0; i < StS.rows(); ++i)
        EXPECT_TRUE(StS(i, i) == 0.0 || StS(i, i) == 1.0);
    EXPECT_EQ(StS.trace(), double(g.size() / d.total()));
}

TEST(DenseOperators, DenseMatchesDirectSH) {
    for (const auto& [g, d] : {std::pair{Grid3(8, 4, 4), Decimation{2, 2, 2}}, std::pair{Grid3(6, 5, 3), Decimation{3, 5, 1}}}) {
        const auto r = random_complex(g, 3);
        const KernelSpectrum k{g, {r.data().begin(), r.data().end()}};
        const auto ops = build_dense(g, k, d);
        const auto x = random_complex(g, 4);
        EXPECT_LE(test::rel_diff(apply(ops, x), test::brute_SH(x, k.values, d)), 1e-10);
    }
}

TEST(DenseOperators, DftMatrixIsUnitary) {
    const Grid3 g(4, 3, 2);
    const Matrix F = dft_matrix(g);
    EXPECT_LE((F.adjoint() * F - Matrix::Identity(g.size(), g.size())).norm(), 1e-12);
    const auto x = random_complex(g, 1);
    EXPECT_LE(test::rel_diff(to_volume(F * to_vector(x), g), test::brute_dft(x, -1)), 1e-12);
    EXPECT_LE(test::rel_diff(ComplexVolume(g, naive_dft(g, {x.data().begin(), x.data().end()}, -1)), test::brute_dft(x, -1)),
              1e-12);
}

TEST(DenseSolve, NormalMatrixIsPositiveDefinite) {
    const Grid3 g(4, 4, 4);
    const Decimation d{2, 2, 1};
    const double tau = 0.01;
    const auto A = normal_matrix(build_dense(g, gaussian_spectrum(g, {2, 2, 2}), d), tau);
    EXPECT_LE((A - A.adjoint()).norm(), 1e-12 * A.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    EXPECT_GE(es.eigenvalues().minCoeff(), 2.0 * tau - 1e-12);
}

TEST(DenseSolve, ResidualAndLimit) {
    const Grid3 g(8, 4, 4);
    const Decimation d{2, 2, 2};
    const auto ops = build_dense(g, ideal_lowpass_spectrum(g, d), d);
    const auto y = random_complex(ops.lr, 1), p = random_complex(g, 2);
    const double tau = 0.05;
    const auto x = dense_solve(y, p, ops, tau);
    const Matrix SH = ops.S.cast<complex_t>() * ops.H;
    const Vector b = SH.adjoint() * to_vector(y) + 2.0 * tau * to_vector(p);
    EXPECT_LE((normal_matrix(ops, tau) * to_vector(x) - b).norm(), 1e-10 * b.norm());
    EXPECT_LE(relative_error(dense_solve(y, p, ops, 1e8), p), 1e-6);
    EXPECT_THROW(dense_solve(y, p, ops, 0.0), ParameterError);
}

TEST(DenseSolve, SizeGuard) { EXPECT_THROW(build_dense(Grid3(32, 32, 8), KernelSpectrum::identity(Grid3(32, 32, 8)), {1, 1, 1}), ParameterError); }

TEST(OracleCheck, SingleCaseAndNegativeControl) {
    const std::vector<CheckCase> cases{{Grid3(8, 8, 8), {2, 2, 2}, KernelType::ideal, 0.05},
                                       {Grid3(6, 6, 6), {2, 2, 1}, KernelType::gaussian, 1e-3}};
    const auto good = run_oracle_check(cases);
    EXPECT_TRUE(good.passed());
    EXPECT_LE(good.max_relative_error, 1e-8);
    const auto bad = run_oracle_check(cases, 1e-8, 0.5);
    EXPECT_FALSE(bad.passed());
    EXPECT_EQ(bad.failures, cases.size());
}

TEST(OracleCheck, SkipsIndivisibleCase) {
    const auto s = run_oracle_check({{Grid3(6, 6, 6), {4, 1, 1}, KernelType::ideal, 1.0}});
    ASSERT_EQ(s.results.size(), 1u);
    EXPECT_TRUE(s.results[0].skipped);
    EXPECT_TRUE(s.passed());
}
