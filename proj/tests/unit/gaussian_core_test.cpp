#include <gtest/gtest.h>

#include "oracle.hpp"
#include "rdad/random.hpp"
#include "rdad/gaussian_core.hpp"

using namespace rdad;

namespace {

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void expect_well_formed(const CovarianceSpec& c) {
    const VectorXd& ev = c.eigenvalues();
    for (Index j = 0; j < ev.size(); ++j) {
        EXPECT_GE(ev(j), 0.0);
        if (j > 0) EXPECT_LE(ev(j), ev(j - 1));
    }
    const Index n = c.dim();
    EXPECT_LE(max_abs(c.basis().transpose() * c.basis() - MatrixXd::Identity(n, n)), 1e-10);
    const MatrixXd m = c.basis() * ev.asDiagonal() * c.basis().transpose();
    EXPECT_LE(max_abs(m - m.transpose()), 1e-10);
}

}  // namespace

TEST(CovarianceSpec, FromMatrixSortsAndReconstructs) {
    Rng rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd a(6, 6);
        for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
        const MatrixXd m = a * a.transpose();
        const CovarianceSpec c = CovarianceSpec::from_matrix(m);
        expect_well_formed(c);
        EXPECT_LE(max_abs(c.matrix() - m), 1e-10 * max_abs(m));
    }
}

TEST(CovarianceSpec, DiagonalKeepsExactEntries) {
    const CovarianceSpec c = CovarianceSpec::from_diagonal(VectorXd::LinSpaced(4, 0.5, 2.0));
    expect_well_formed(c);
    EXPECT_EQ(c.eigenvalues()(0), 2.0);
    EXPECT_EQ(c.eigenvalues()(3), 0.5);
    const MatrixXd expected = VectorXd::LinSpaced(4, 0.5, 2.0).asDiagonal();
    EXPECT_EQ(max_abs(c.matrix() - expected), 0.0);
}

TEST(CovarianceSpec, RejectsInvalidInput) {
    MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    EXPECT_THROW(CovarianceSpec::from_matrix(asym), DomainError);
    MatrixXd indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(CovarianceSpec::from_matrix(indefinite), DomainError);
    MatrixXd not_orthogonal = MatrixXd::Ones(2, 2);
    EXPECT_THROW(CovarianceSpec::from_eigen(VectorXd::Ones(2), not_orthogonal), DomainError);
}

TEST(CovarianceSpec, ClampsRoundOffNegatives) {
    const CovarianceSpec c = CovarianceSpec::from_diagonal((VectorXd(3) << 1.0, -1e-13, 0.5).finished());
    EXPECT_EQ(c.min_eigenvalue(), 0.0);
}

TEST(Ar1Covariance, WhiteCaseIsIdentity) {
    const CovarianceSpec c = ar1_covariance(0.0, 4);
    EXPECT_EQ(max_abs(c.eigenvalues() - VectorXd::Ones(4)), 0.0);
    EXPECT_EQ(max_abs(c.basis() - MatrixXd::Identity(4, 4)), 0.0);
}

TEST(Ar1Covariance, TwoByTwoEigenvalues) {
    const CovarianceSpec c = ar1_covariance(0.5, 2);
    EXPECT_NEAR(c.eigenvalues()(0), 1.5, 1e-14);
    EXPECT_NEAR(c.eigenvalues()(1), 0.5, 1e-14);
}

TEST(Ar1Covariance, TraceAndSpectrumMatchDenseOracle) {
    const CovarianceSpec c = ar1_covariance(0.9, 32);
    EXPECT_NEAR(c.trace(), 32.0, 1e-9);
    expect_well_formed(c);
    EXPECT_LE((c.eigenvalues() - oracle::ar1_eigenvalues(0.9, 32)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Localization, ClosedFormCases) {
    EXPECT_EQ(localization(VectorXd::Ones(4)), 0.0);
    VectorXd spike = VectorXd::Zero(8);
    spike(0) = 8.0;
    EXPECT_NEAR(localization(spike), 1.0 - 1.0 / 8.0, 1e-15);
    EXPECT_NEAR(localization((VectorXd(2) << 1.5, 0.5).finished()), 0.125, 1e-15);
}

TEST(Localization, SolveOmegaRoundTrip) {
    EXPECT_EQ(solve_omega_for_localization(0.0, 32, 1e-10), 0.0);
    for (double target : {0.05, 0.2}) {
        const double omega = solve_omega_for_localization(target, 32, 1e-8);
        EXPECT_GT(omega, 0.0);
        EXPECT_LT(omega, 1.0);
        EXPECT_NEAR(oracle::localization(oracle::ar1_eigenvalues(omega, 32)), target, 1e-8);
    }
    EXPECT_THROW(solve_omega_for_localization(1.0, 32, 1e-8), DomainError);
}

TEST(SampleGaussian, ZeroVarianceComponentIsExactlyZero) {
    Rng rng(1);
    const CovarianceSpec c = CovarianceSpec::from_diagonal((VectorXd(3) << 2.0, 1.0, 0.0).finished());
    const GaussianSampleBatch b = sample_gaussian(c, 1000, rng);
    EXPECT_EQ(b.data().col(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleGaussian, IdentityCovarianceMonteCarlo) {
    Rng rng(42);
    const GaussianSampleBatch b = sample_gaussian(CovarianceSpec::from_diagonal(VectorXd::Ones(2)), 100000, rng);
    EXPECT_LE(max_abs(sample_covariance_matrix(b) - MatrixXd::Identity(2, 2)), 0.05);
}

TEST(SampleGaussian, DiagonalVariancesMonteCarlo) {
    Rng rng(7);
    const GaussianSampleBatch b =
        sample_gaussian(CovarianceSpec::from_diagonal((VectorXd(2) << 1.5, 0.5).finished()), 100000, rng);
    const MatrixXd s = sample_covariance_matrix(b);
    EXPECT_NEAR(s(0, 0) / 1.5, 1.0, 0.03);
    EXPECT_NEAR(s(1, 1) / 0.5, 1.0, 0.03);
}

TEST(SampleCovariance, HandArithmetic) {
    MatrixXd same(3, 2);
    same << 1, 2, 1, 2, 1, 2;
    EXPECT_EQ(max_abs(sample_covariance_matrix(GaussianSampleBatch(same))), 0.0);
    MatrixXd two(2, 2);
    two << 1, 0, -1, 0;
    const MatrixXd s = sample_covariance_matrix(GaussianSampleBatch(two));
    EXPECT_DOUBLE_EQ(s(0, 0), 2.0);
    EXPECT_EQ(s(1, 1), 0.0);
    EXPECT_EQ(s(0, 1), 0.0);
    // Zero-mean convention divides raw moments by the count.
    EXPECT_DOUBLE_EQ(sample_covariance_matrix(GaussianSampleBatch(two), false)(0, 0), 1.0);
}

TEST(SampleCovariance, RoundTripOnCorrelatedSource) {
    Rng rng(11);
    const CovarianceSpec c = ar1_covariance(0.6, 5);
    const CovarianceSpec est = sample_covariance(sample_gaussian(c, 100000, rng));
    for (Index j = 0; j < 5; ++j) EXPECT_NEAR(est.eigenvalues()(j) / c.eigenvalues()(j), 1.0, 0.03);
}

TEST(GaussianSampleBatch, RejectsNonFinite) {
    MatrixXd m = MatrixXd::Zero(2, 2);
    m(1, 1) = std::nan("");
    EXPECT_THROW(GaussianSampleBatch{m}, DomainError);
}

TEST(Localization, DependsOnSpectrumOnly) {
    const CovarianceSpec c = ar1_covariance(0.7, 6);
    VectorXd shuffled = c.eigenvalues().reverse();
    std::swap(shuffled(1), shuffled(4));
    EXPECT_NEAR(localization(shuffled), localization(c), 1e-15);
    const CovarianceSpec rotated = CovarianceSpec::from_eigen(c.eigenvalues(), MatrixXd::Identity(6, 6));
    EXPECT_NEAR(localization(rotated), localization(c), 1e-15);
}

TEST(Ar1Covariance, TraceAcrossParameterGrid) {
    for (Index n : {2, 8, 32}) {
        for (int k = 0; k <= 9; ++k) {
            const CovarianceSpec c = ar1_covariance(0.1 * k, n);
            EXPECT_NEAR(c.eigenvalues().sum(), static_cast<double>(n), 1e-9);
            MatrixXd m(n, n);
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) m(i, j) = std::pow(0.1 * k, static_cast<double>(std::abs(i - j)));
            EXPECT_LE(max_abs(c.matrix() - m), 1e-9);
        }
    }
}

TEST(SampleGaussian, SameSeedSameBatch) {
    const CovarianceSpec c = ar1_covariance(0.4, 5);
    Rng a(77), b(77);
    EXPECT_EQ(max_abs(sample_gaussian(c, 100, a).data() - sample_gaussian(c, 100, b).data()), 0.0);
}
