#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rdad/distinguishability.hpp"
#include "rdad/errors.hpp"
#include "rdad/gaussian_core.hpp"

namespace rdad {

enum class Detector { ld, npd };

inline std::string_view to_string(Detector d) { return d == Detector::ld ? "ld" : "npd"; }

inline Detector parse_detector(std::string_view name) {
    if (name == "ld") return Detector::ld;
    if (name == "npd") return Detector::npd;
    throw DomainError("unknown detector '" + std::string(name) + "'");
}

/// -log2 of a zero-mean Gaussian density, with the whitening precomputed.
class GaussianScorer {
public:
    explicit GaussianScorer(const CovarianceSpec& cov) {
        detail::require(cov.dim() >= 1, "density needs a non-empty covariance");
        detail::require(cov.min_eigenvalue() > 0.0, "density covariance is singular");
        const VectorXd& lambda = cov.eigenvalues();
        whiten_ = cov.basis() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
        offset_ = static_cast<double>(cov.dim()) * std::log(2.0 * std::numbers::pi) + lambda.array().log().sum();
    }

    Index dim() const { return whiten_.rows(); }

    double operator()(const VectorXd& x) const {
        detail::require(x.size() == dim(), "score input has the wrong dimension");
        return kHalfNatToBits * (offset_ + (whiten_.transpose() * x).squaredNorm());
    }

    /// Scores every row of `x`.
    VectorXd rows(const MatrixXd& x) const {
        detail::require(x.cols() == dim(), "score input has the wrong dimension");
        const MatrixXd y = x * whiten_;
        return (kHalfNatToBits * (y.rowwise().squaredNorm().array() + offset_)).matrix();
    }

private:
    MatrixXd whiten_;
    double offset_ = 0.0;
};

/// Likelihood detector: -log2 f_ok(x_hat) on the surviving components.
inline double ld_score(const VectorXd& x_hat, const CovarianceSpec& hat_ok) { return GaussianScorer(hat_ok)(x_hat); }

/// Neyman-Pearson detector: log2 f_ko(x_hat) - log2 f_ok(x_hat).
inline double npd_score(const VectorXd& x_hat, const CovarianceSpec& hat_ok, const CovarianceSpec& hat_ko) {
    return GaussianScorer(hat_ok)(x_hat) - GaussianScorer(hat_ko)(x_hat);
}

/// Mann-Whitney estimate of P(score_ko > score_ok), ties counted one half.
inline double auc(std::span<const double> scores_ok, std::span<const double> scores_ko) {
    detail::require(!scores_ok.empty() && !scores_ko.empty(), "AUC needs non-empty score sets");
    struct Entry {
        double score;
        bool ko;
    };
    std::vector<Entry> all;
    all.reserve(scores_ok.size() + scores_ko.size());
    for (double s : scores_ok) all.push_back({s, false});
    for (double s : scores_ko) all.push_back({s, true});
    for (const Entry& e : all) {
        detail::require(std::isfinite(e.score), "scores must be finite");
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Twice the Mann-Whitney U for the ko set, kept integral until the final division.
    double ok_below = 0.0;
    double twice_u = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        double ok_tied = 0.0;
        double ko_tied = 0.0;
        while (j < all.size() && all[j].score == all[i].score) {
            (all[j].ko ? ko_tied : ok_tied) += 1.0;
            ++j;
        }
        twice_u += ko_tied * (2.0 * ok_below + ok_tied);
        ok_below += ok_tied;
        i = j;
    }
    return twice_u / (2.0 * static_cast<double>(scores_ok.size()) * static_cast<double>(scores_ko.size()));
}

/// Empirical distinguishability: AUC folded about one half.
inline double psi(double auc_value) {
    detail::require(auc_value >= 0.0 && auc_value <= 1.0, "AUC must lie in [0, 1]");
    return auc_value >= 0.5 ? auc_value : 1.0 - auc_value;
}

struct DetectionResult {
    double auc = 0.5;
    double psi = 0.5;
    Index n_ok = 0;
    Index n_ko = 0;
    bool degenerate = false;
};

/// Scores of fresh compressed instances drawn from both blocks of `pair`.
struct ScoreSets {
    std::vector<double> ok;
    std::vector<double> ko;
};

template <class Rng>
ScoreSets score_instances(Detector detector, const DistortedPair& pair, Index n_ok, Index n_ko, Rng& rng) {
    const GaussianSampleBatch x_ok = sample_gaussian(pair.hat_ok, n_ok, rng);
    const GaussianSampleBatch x_ko = sample_gaussian(pair.hat_ko, n_ko, rng);
    const GaussianScorer ok_density(pair.hat_ok);
    VectorXd s_ok = ok_density.rows(x_ok.data());
    VectorXd s_ko = ok_density.rows(x_ko.data());
    if (detector == Detector::npd) {
        const GaussianScorer ko_density(pair.hat_ko);
        s_ok -= ko_density.rows(x_ok.data());
        s_ko -= ko_density.rows(x_ko.data());
    }
    return {{s_ok.data(), s_ok.data() + s_ok.size()}, {s_ko.data(), s_ko.data() + s_ko.size()}};
}

/**
 * Draws n_ok normal and n_ko anomalous compressed instances, scores them with the
 * chosen detector and returns AUC and psi. A pair with no surviving component yields
 * psi = 1/2 with the degenerate flag set.
 */
template <class Rng>
DetectionResult evaluate(Detector detector, const DistortedPair& pair, Index n_ok, Index n_ko, Rng& rng) {
    detail::require(n_ok >= 2 && n_ko >= 2, "need at least two instances per class");
    DetectionResult result;
    result.n_ok = n_ok;
    result.n_ko = n_ko;
    if (pair.degenerate()) {
        result.degenerate = true;
        return result;
    }
    const ScoreSets scores = score_instances(detector, pair, n_ok, n_ko, rng);
    result.auc = auc(scores.ok, scores.ko);
    result.psi = psi(result.auc);
    return result;
}

}  // namespace rdad
