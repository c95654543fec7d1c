#include <gtest/gtest.h>

#include "oracle.hpp"
#include "rdad/random.hpp"
#include "rdad/anomaly_sampling.hpp"
#include "rdad/detectors_eval.hpp"

using namespace rdad;

namespace {

MatrixXd diag(std::initializer_list<double> v) {
    VectorXd d(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

}  // namespace

TEST(LdScore, MatchesDensityOracle) {
    const CovarianceSpec one = CovarianceSpec::from_diagonal(VectorXd::Ones(1));
    EXPECT_NEAR(ld_score(VectorXd::Zero(1), one), 1.3257480647361595, 1e-12);

    const CovarianceSpec c = ar1_covariance(0.6, 4);
    Rng rng(1);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 50; ++i) {
        VectorXd a(4), b(4);
        for (Index j = 0; j < 4; ++j) {
            a(j) = normal(rng);
            b(j) = normal(rng);
        }
        EXPECT_NEAR(ld_score(a, c), -oracle::log2_density(a, c.matrix()), 1e-10);
        const MatrixXd inv = c.matrix().inverse();
        EXPECT_NEAR(ld_score(a, c) - ld_score(b, c), (a.dot(inv * a) - b.dot(inv * b)) / (2.0 * std::numbers::ln2),
                    1e-10);
    }
}

TEST(LdScore, MeanEqualsEntropy) {
    Rng rng(2);
    const CovarianceSpec c = ar1_covariance(0.6, 4);
    const GaussianSampleBatch b = sample_gaussian(c, 100000, rng);
    const VectorXd s = GaussianScorer(c).rows(b.data());
    const double mean = s.mean();
    const double se = std::sqrt((s.array() - mean).square().sum() / (s.size() - 1.0) / s.size());
    EXPECT_NEAR(mean, cross_coding_rate(c, c), 4.0 * se);
}

TEST(NpdScore, Examples) {
    const CovarianceSpec one = CovarianceSpec::from_diagonal(VectorXd::Ones(1));
    const CovarianceSpec two = CovarianceSpec::from_diagonal(VectorXd::Constant(1, 2.0));
    EXPECT_NEAR(npd_score(VectorXd::Zero(1), one, two), -0.5, 1e-14);
    const CovarianceSpec c = ar1_covariance(0.3, 3);
    EXPECT_NEAR(npd_score(VectorXd::Ones(3), c, c), 0.0, 1e-14);
}

TEST(NpdScore, MeanGapEqualsKappa) {
    Rng rng(3);
    const DistortedPair pair = DistortedPair::from_blocks(diag({1.5, 0.5}), diag({0.5, 1.5}));
    const ScoreSets s = score_instances(Detector::npd, pair, 200000, 200000, rng);
    auto mean_var = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double q = 0.0;
        for (double x : v) q += (x - m) * (x - m);
        return std::pair{m, q / (static_cast<double>(v.size()) - 1.0)};
    };
    const auto [m_ok, v_ok] = mean_var(s.ok);
    const auto [m_ko, v_ko] = mean_var(s.ko);
    const double se = std::sqrt(v_ok / s.ok.size() + v_ko / s.ko.size());
    EXPECT_NEAR(m_ko - m_ok, kappa(pair), 4.0 * se);
}

TEST(Auc, Examples) {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    EXPECT_EQ(auc(a, b), 1.0);
    EXPECT_EQ(auc(b, a), 0.0);
    const std::vector<double> c{1, 3}, d{2, 4};
    EXPECT_EQ(auc(c, d), 0.75);
    const std::vector<double> e{1, 2, 2, 5}, f{5, 2, 1, 2};
    EXPECT_EQ(auc(e, f), 0.5);
    EXPECT_THROW(auc(std::vector<double>{}, a), DomainError);
}

TEST(Auc, MatchesBruteForceWithTies) {
    Rng rng(4);
    std::uniform_int_distribution<int> level(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> ok(37), ko(23);
        for (double& x : ok) x = level(rng);
        for (double& x : ko) x = level(rng) + (trial % 3);
        EXPECT_NEAR(auc(ok, ko), oracle::brute_force_auc(ok, ko), 1e-15);
    }
}

TEST(Psi, Fold) {
    EXPECT_EQ(psi(0.5), 0.5);
    EXPECT_DOUBLE_EQ(psi(0.3), 0.7);
    EXPECT_EQ(psi(1.0), 1.0);
    EXPECT_EQ(psi(0.0), 1.0);
    EXPECT_THROW(psi(1.2), DomainError);
}

TEST(Evaluate, NoSignalGivesHalf) {
    const DistortedPair same = DistortedPair::from_blocks(diag({1.5, 0.5}), diag({1.5, 0.5}));
    for (Detector det : {Detector::ld, Detector::npd}) {
        Rng rng(5);
        const DetectionResult r = evaluate(det, same, 1000, 1000, rng);
        EXPECT_NEAR(r.psi, 0.5, 0.03);
        EXPECT_EQ(r.psi, psi(r.auc));
    }
}

TEST(Evaluate, StrongAnomalyIsDetected) {
    Rng rng(6);
    const DistortedPair pair = DistortedPair::from_blocks(diag({1.5, 0.5}), diag({0.5, 1.5}));
    const DetectionResult r = evaluate(Detector::npd, pair, 1000, 1000, rng);
    // The score is proportional to x_1^2 - x_0^2; its exact AUC for this pair is 3/4.
    EXPECT_NEAR(r.psi, 0.75, 0.04);
}

TEST(Evaluate, LdBlindOnWhiteNormal) {
    // White normal source: the likelihood detector only sees the energy, which the
    // trace-n anomalies share.
    Rng rng(7);
    const CovarianceSpec source = CovarianceSpec::from_diagonal(VectorXd::Ones(16));
    for (int i = 0; i < 5; ++i) {
        const MatrixXd ko = sample_anomaly(16, rng).covariance();
        const DetectionResult r = evaluate(Detector::ld, rdc_distorted_pair(source, ko, 0.3), 1000, 1000, rng);
        EXPECT_NEAR(r.psi, 0.5, 0.05);
    }
}

TEST(Evaluate, DegeneratePair) {
    Rng rng(8);
    const DetectionResult r = evaluate(Detector::ld, DistortedPair{}, 10, 10, rng);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.psi, 0.5);
    EXPECT_THROW(evaluate(Detector::ld, DistortedPair{}, 1, 10, rng), DomainError);
}

TEST(Detector, NamesRoundTrip) {
    EXPECT_EQ(parse_detector(to_string(Detector::ld)), Detector::ld);
    EXPECT_EQ(parse_detector(to_string(Detector::npd)), Detector::npd);
    EXPECT_THROW(parse_detector("svm"), DomainError);
}

TEST(Auc, RankInvarianceAndComplement) {
    Rng rng(50);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> ok(40), ko(30);
        for (double& x : ok) x = std::round(4.0 * normal(rng));
        for (double& x : ko) x = std::round(4.0 * normal(rng) + 1.0);
        std::vector<double> ok_t, ko_t;
        for (double x : ok) ok_t.push_back(std::exp(0.3 * x) + 7.0);
        for (double x : ko) ko_t.push_back(std::exp(0.3 * x) + 7.0);
        EXPECT_EQ(auc(ok, ko), auc(ok_t, ko_t));
        EXPECT_EQ(auc(ok, ko) + auc(ko, ok), 1.0);
    }
}

TEST(Evaluate, SameSeedSameResult) {
    const DistortedPair pair = DistortedPair::from_blocks(diag({2.0, 1.0, 0.5}), diag({1.0, 1.0, 1.0}));
    Rng a(51), b(51);
    const DetectionResult ra = evaluate(Detector::npd, pair, 300, 300, a);
    const DetectionResult rb = evaluate(Detector::npd, pair, 300, 300, b);
    EXPECT_EQ(ra.auc, rb.auc);
    EXPECT_EQ(ra.psi, rb.psi);
}

TEST(Evaluate, NpdDominatesLdOnAFixedPair) {
    Rng anomaly_rng(52);
    const CovarianceSpec source = ar1_covariance(0.5, 8);
    const DistortedPair pair = rdc_distorted_pair(source, sample_anomaly(8, anomaly_rng).covariance(), 0.2);
    double ld = 0.0, npd = 0.0;
    for (int s = 0; s < 50; ++s) {
        Rng r1(1000 + s), r2(2000 + s);
        ld += evaluate(Detector::ld, pair, 500, 500, r1).psi;
        npd += evaluate(Detector::npd, pair, 500, 500, r2).psi;
    }
    EXPECT_GE(npd / 50, ld / 50 - 0.02);
}
