#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdad/errors.hpp"
#include "rdad/gaussian_core.hpp"

namespace rdad {

/// Eigenvalues drawn uniformly from the simplex {lambda >= 0, sum lambda = n}.
/// Normalized logs of uniforms are Dirichlet(1, ..., 1); they are scaled by n.
template <class Rng>
VectorXd sample_simplex_eigenvalues(Index n, Rng& rng) {
    detail::require(n >= 1, "dimension must be positive");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    VectorXd logs(n);
    for (Index j = 0; j < n; ++j) {
        double xi = 0.0;
        while (xi == 0.0) {
            xi = uniform(rng);
        }
        logs(j) = std::log(xi);
    }
    const double total = logs.sum();
    // Redraws are only needed if every xi was exactly 1, a probability-zero event.
    if (total == 0.0) {
        return sample_simplex_eigenvalues(n, rng);
    }
    return (logs / total) * static_cast<double>(n);
}

/// Haar-distributed orthogonal matrix: QR of a Ginibre matrix with the columns of Q
/// multiplied by sign(R_jj), which removes the bias of the raw Householder factor.
template <class Rng>
MatrixXd sample_haar_orthogonal(Index n, Rng& rng) {
    detail::require(n >= 1, "dimension must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        MatrixXd a(n, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < n; ++i) {
                a(i, j) = normal(rng);
            }
        }
        Eigen::HouseholderQR<MatrixXd> qr(a);
        const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        bool full_rank = true;
        for (Index j = 0; j < n; ++j) {
            if (r(j, j) == 0.0) {
                full_rank = false;
            }
        }
        if (!full_rank) {
            continue;
        }
        MatrixXd q = qr.householderQ();
        for (Index j = 0; j < n; ++j) {
            if (r(j, j) < 0.0) {
                q.col(j) = -q.col(j);
            }
        }
        return q;
    }
}

/// Anomalous covariance U diag(lambda) U^T with trace n. Eigenvalues are not sorted.
struct AnomalyModel {
    VectorXd eigenvalues;
    MatrixXd basis;

    Index dim() const { return eigenvalues.size(); }

    MatrixXd covariance() const {
        MatrixXd m = basis * eigenvalues.asDiagonal() * basis.transpose();
        return 0.5 * (m + m.transpose());
    }

    CovarianceSpec spec() const { return CovarianceSpec::from_eigen(eigenvalues, basis); }
};

inline AnomalyModel white_anomaly(Index n) {
    return {VectorXd::Ones(n), MatrixXd::Identity(n, n)};
}

template <class Rng>
AnomalyModel sample_anomaly(Index n, Rng& rng) {
    AnomalyModel model;
    model.eigenvalues = sample_simplex_eigenvalues(n, rng);
    model.basis = sample_haar_orthogonal(n, rng);
    return model;
}

/// Normalized Frobenius and max-entry deviation of a covariance from the identity.
struct IdentityDeviation {
    double delta2 = 0.0;
    double delta_inf = 0.0;
};

inline IdentityDeviation deviation_from_identity(const MatrixXd& cov) {
    const Index n = cov.rows();
    const MatrixXd diff = cov - MatrixXd::Identity(n, n);
    return {diff.norm() / static_cast<double>(n), diff.cwiseAbs().maxCoeff()};
}

/// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> values, double q) {
    detail::require(!values.empty(), "quantile of an empty sample");
    detail::require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

struct ConcentrationStats {
    std::vector<Index> dims;
    std::vector<double> delta2_mean, delta2_lo, delta2_hi;
    std::vector<double> deltainf_mean, deltainf_lo, deltainf_hi;
    Index population = 0;
    double percentile = 0.98;
};

/**
 * Spread of uniformly sampled anomaly covariances around the identity, per dimension.
 * The band is the central `percentile` of the population (0.98 reproduces the usual
 * 98% shading).
 */
template <class Rng>
ConcentrationStats concentration_stats(const std::vector<Index>& dims, Index population, double percentile,
                                       Rng& rng) {
    detail::require(population >= 50, "population must be at least 50");
    detail::require(percentile > 0.0 && percentile <= 1.0, "percentile must lie in (0, 1]");
    detail::require(std::is_sorted(dims.begin(), dims.end()), "dimensions must be ascending");

    ConcentrationStats stats;
    stats.dims = dims;
    stats.population = population;
    stats.percentile = percentile;
    const double tail = 0.5 * (1.0 - percentile);
    for (const Index n : dims) {
        detail::require(n >= 1, "dimension must be positive");
        std::vector<double> d2, dinf;
        d2.reserve(static_cast<std::size_t>(population));
        dinf.reserve(static_cast<std::size_t>(population));
        for (Index i = 0; i < population; ++i) {
            const IdentityDeviation dev = deviation_from_identity(sample_anomaly(n, rng).covariance());
            d2.push_back(dev.delta2);
            dinf.push_back(dev.delta_inf);
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        stats.delta2_mean.push_back(mean(d2));
        stats.delta2_lo.push_back(empirical_quantile(d2, tail));
        stats.delta2_hi.push_back(empirical_quantile(d2, 1.0 - tail));
        stats.deltainf_mean.push_back(mean(dinf));
        stats.deltainf_lo.push_back(empirical_quantile(dinf, tail));
        stats.deltainf_hi.push_back(empirical_quantile(dinf, 1.0 - tail));
    }
    return stats;
}

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_m.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
    std::vector<double> nodes(static_cast<std::size_t>(m));
    std::vector<double> weights(static_cast<std::size_t>(m));
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= m; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(m - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(m - 1 - i)] = w;
    }
    return {nodes, weights};
}

}  // namespace detail

/**
 * E[f(lambda_j)] for lambda uniform on the trace-n simplex, computed as
 * ((n-1)/n^(n-1)) * integral_0^n f(p) (n-p)^(n-2) dp with composite 16-point
 * Gauss-Legendre panels. The weight is evaluated in log space.
 * `quadrature_points` is the total node budget (rounded down to whole panels).
 */
template <class F>
double simplex_coordinate_expectation(Index n, F&& integrand, Index quadrature_points) {
    detail::require(n >= 1, "dimension must be positive");
    detail::require(quadrature_points >= 16, "need at least 16 quadrature points");
    if (n == 1) {
        return integrand(1.0);
    }
    constexpr int order = 16;
    static const auto rule = detail::gauss_legendre(order);
    const Index panels = quadrature_points / order;
    const double nn = static_cast<double>(n);
    const double log_norm = std::log(nn - 1.0) - (nn - 1.0) * std::log(nn);
    const double width = nn / static_cast<double>(panels);
    double total = 0.0;
    for (Index p = 0; p < panels; ++p) {
        const double a = width * static_cast<double>(p);
        const double half = 0.5 * width;
        const double mid = a + half;
        for (int k = 0; k < order; ++k) {
            const double x = mid + half * rule.first[static_cast<std::size_t>(k)];
            const double log_w = log_norm + (nn - 2.0) * std::log(nn - x);
            const double w = std::exp(log_w);
            total += half * rule.second[static_cast<std::size_t>(k)] * w * integrand(x);
        }
    }
    if (!std::isfinite(total)) {
        throw NumericError("simplex quadrature overflowed");
    }
    return total;
}

}  // namespace rdad
