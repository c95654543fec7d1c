#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rdad/errors.hpp"
#include "rdad/gaussian_core.hpp"

namespace rdad {

/**
 * Operating point of the Gaussian reverse water-filling solution.
 *
 * tau(j) = min{1, theta/lambda_j} is the fraction of energy removed from component j
 * and s(j) = 1 - tau(j) the fraction that survives. A component survives when
 * lambda_j > theta strictly. rate_bits is empty when the rate is unbounded
 * (theta = 0 on a spectrum with positive energy).
 */
struct WaterFillSolution {
    double theta = 0.0;
    VectorXd tau;
    VectorXd s;
    Index n_theta = 0;
    std::optional<double> rate_bits;
    double distortion = 0.0;

    bool rate_unbounded() const { return !rate_bits.has_value(); }
};

struct RdPoint {
    std::optional<double> rate_bits;  ///< empty = unbounded
    double distortion = 0.0;
};

namespace detail {

inline void require_spectrum(const VectorXd& eigenvalues) {
    require(eigenvalues.size() >= 1, "spectrum must be non-empty");
    for (Index j = 0; j < eigenvalues.size(); ++j) {
        require(std::isfinite(eigenvalues(j)) && eigenvalues(j) >= 0.0, "eigenvalues must be non-negative");
        if (j > 0) {
            require(eigenvalues(j) <= eigenvalues(j - 1), "eigenvalues must be sorted in descending order");
        }
    }
    require(eigenvalues(0) > 0.0, "spectrum needs at least one positive eigenvalue");
}

}  // namespace detail

/// Evaluates the water-filling quantities at a given water level.
inline WaterFillSolution water_level_solution(const VectorXd& eigenvalues, double theta) {
    detail::require_spectrum(eigenvalues);
    detail::require(theta >= 0.0 && theta <= eigenvalues(0), "theta must lie in [0, lambda_0]");
    const Index n = eigenvalues.size();
    WaterFillSolution sol;
    sol.theta = theta;
    sol.tau.resize(n);
    sol.s.resize(n);
    double rate = 0.0;
    bool unbounded = false;
    for (Index j = 0; j < n; ++j) {
        const double lambda = eigenvalues(j);
        if (lambda > theta) {
            sol.tau(j) = theta / lambda;
            ++sol.n_theta;
            if (theta == 0.0) {
                unbounded = true;
            } else {
                rate += 0.5 * std::log2(lambda / theta);
            }
        } else {
            // Cancelled component, including lambda_j = 0.
            sol.tau(j) = 1.0;
        }
        sol.s(j) = 1.0 - sol.tau(j);
        sol.distortion += std::min(theta, lambda);
    }
    if (!unbounded) {
        sol.rate_bits = rate;
    }
    return sol;
}

/**
 * Water level theta with sum_j min{theta, lambda_j} = delta.
 *
 * The distortion is piecewise linear in theta with kinks at the eigenvalues, so the
 * segment holding delta is located with prefix sums over the ascending spectrum and
 * inverted exactly.
 */
inline WaterFillSolution reverse_waterfill(const VectorXd& eigenvalues, double delta) {
    detail::require_spectrum(eigenvalues);
    const double total = eigenvalues.sum();
    detail::require(delta > 0.0, "distortion must be positive (zero distortion needs unbounded rate)");
    detail::require(delta <= total, "distortion exceeds the source energy");

    // Full distortion up to round-off in the trace: cancel everything exactly.
    if (delta >= total * (1.0 - 1e-12)) {
        return water_level_solution(eigenvalues, eigenvalues(0));
    }

    const Index n = eigenvalues.size();
    std::vector<double> ascending(eigenvalues.data(), eigenvalues.data() + n);
    std::reverse(ascending.begin(), ascending.end());

    double theta = eigenvalues(0);
    double prefix = 0.0;
    for (Index k = 0; k < n; ++k) {
        // On [ascending[k-1], ascending[k]] the distortion is prefix + (n - k) * theta.
        const double candidate = (delta - prefix) / static_cast<double>(n - k);
        if (candidate <= ascending[static_cast<std::size_t>(k)]) {
            theta = candidate;
            break;
        }
        prefix += ascending[static_cast<std::size_t>(k)];
    }
    theta = std::clamp(theta, 0.0, eigenvalues(0));
    return water_level_solution(eigenvalues, theta);
}

/// Rate and distortion at water level theta.
inline RdPoint rd_point(const VectorXd& eigenvalues, double theta) {
    const WaterFillSolution sol = water_level_solution(eigenvalues, theta);
    return {sol.rate_bits, sol.distortion};
}

/// Optimal single-use test channel for a Gaussian source, acting in the source eigenbasis.
struct TestChannel {
    CovarianceSpec source;
    WaterFillSolution solution;

    static TestChannel at_theta(const CovarianceSpec& source, double theta) {
        return {source, water_level_solution(source.eigenvalues(), theta)};
    }

    static TestChannel at_distortion(const CovarianceSpec& source, double delta) {
        return {source, reverse_waterfill(source.eigenvalues(), delta)};
    }
};

/// Covariance of the optimally distorted normal signal, diag(max{0, lambda_j - theta}),
/// expressed in the source eigenbasis (identity basis).
inline CovarianceSpec distorted_normal_cov(const CovarianceSpec& source, double theta) {
    const VectorXd& lambda = source.eigenvalues();
    detail::require(source.dim() >= 1, "source must be non-empty");
    detail::require(theta >= 0.0 && theta <= lambda(0), "theta must lie in [0, lambda_0]");
    VectorXd out(lambda.size());
    for (Index j = 0; j < lambda.size(); ++j) {
        out(j) = lambda(j) > theta ? lambda(j) - theta : 0.0;
    }
    return CovarianceSpec::from_diagonal(out);
}

/**
 * One draw of the test channel: x_hat ~ N(S x, Sigma S T), component-wise
 * x_hat_j = s_j x_j + sqrt(lambda_j tau_j s_j) z_j for surviving components and 0 otherwise.
 * `x` must be expressed in the source eigenbasis.
 */
template <class Rng>
VectorXd encode_rdc(const VectorXd& x, const TestChannel& channel, Rng& rng) {
    const VectorXd& lambda = channel.source.eigenvalues();
    const WaterFillSolution& sol = channel.solution;
    detail::require(x.size() == lambda.size(), "input dimension does not match the channel");
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd out = VectorXd::Zero(x.size());
    for (Index j = 0; j < x.size(); ++j) {
        if (!(lambda(j) > sol.theta)) {
            continue;
        }
        const double noise_var = lambda(j) * sol.tau(j) * sol.s(j);
        out(j) = sol.s(j) * x(j);
        if (noise_var > 0.0) {
            out(j) += std::sqrt(noise_var) * normal(rng);
        }
    }
    return out;
}

/// Row-wise encode_rdc over a batch expressed in the source eigenbasis.
template <class Rng>
MatrixXd encode_rdc_batch(const MatrixXd& x, const TestChannel& channel, Rng& rng) {
    MatrixXd out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        out.row(i) = encode_rdc(VectorXd(x.row(i).transpose()), channel, rng).transpose();
    }
    return out;
}

/// S (anomaly) S + theta S for an anomaly already in the source eigenbasis.
inline MatrixXd distorted_anomaly_matrix(const MatrixXd& anomaly_eig, const WaterFillSolution& sol) {
    detail::require(anomaly_eig.rows() == sol.s.size() && anomaly_eig.cols() == sol.s.size(),
                    "anomaly and source dimensions differ");
    MatrixXd out = sol.s.asDiagonal() * anomaly_eig * sol.s.asDiagonal();
    out.diagonal() += sol.theta * sol.s;
    return 0.5 * (out + out.transpose());
}

/**
 * Covariance of an anomalous source after passing through the test channel tuned to
 * `source`. The anomaly is given in world coordinates and is conjugated into the
 * source eigenbasis here; the result lives in that eigenbasis.
 */
inline CovarianceSpec distorted_anomaly_cov(const CovarianceSpec& anomaly, const CovarianceSpec& source, double theta) {
    detail::require(anomaly.dim() == source.dim(), "anomaly and source dimensions differ");
    const WaterFillSolution sol = water_level_solution(source.eigenvalues(), theta);
    return CovarianceSpec::from_matrix(distorted_anomaly_matrix(to_eigenbasis(anomaly.matrix(), source), sol));
}

}  // namespace rdad
