#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rdad/distinguishability.hpp"
#include "rdad/errors.hpp"
#include "rdad/gaussian_core.hpp"
#include "rdad/rate_distortion.hpp"

namespace rdad {

/// Principal-component truncation: keep the leading `kept` eigen-components.
struct PccPlan {
    Index kept = 0;
    double achieved_distortion = 0.0;
    CovarianceSpec hat_ok;  ///< diag(lambda_0, ..., lambda_{kept-1})
    MatrixXd basis;         ///< source eigenbasis
};

/// Smallest number of kept components whose dropped tail energy fits the budget.
inline PccPlan pcc_plan(const VectorXd& eigenvalues_ok, double delta_budget) {
    detail::require_spectrum(eigenvalues_ok);
    const Index n = eigenvalues_ok.size();
    const double total = eigenvalues_ok.sum();
    const double slack = 1e-12 * std::max(1.0, total);
    detail::require(delta_budget >= 0.0 && delta_budget <= total + slack, "distortion budget out of range");

    // tail[p] = sum_{j >= p} lambda_j, accumulated from the small end.
    std::vector<double> tail(static_cast<std::size_t>(n + 1), 0.0);
    for (Index p = n - 1; p >= 0; --p) {
        tail[static_cast<std::size_t>(p)] = tail[static_cast<std::size_t>(p + 1)] + eigenvalues_ok(p);
    }
    Index kept = n;
    for (Index p = 0; p <= n; ++p) {
        if (tail[static_cast<std::size_t>(p)] <= delta_budget + slack) {
            kept = p;
            break;
        }
    }
    PccPlan plan;
    plan.kept = kept;
    plan.achieved_distortion = tail[static_cast<std::size_t>(kept)];
    plan.hat_ok = CovarianceSpec::from_diagonal(eigenvalues_ok.head(kept));
    plan.basis = MatrixXd::Identity(n, n);
    return plan;
}

inline PccPlan pcc_plan(const CovarianceSpec& source, double delta_budget) {
    PccPlan plan = pcc_plan(source.eigenvalues(), delta_budget);
    plan.basis = source.basis();
    return plan;
}

/// Keeps the first `kept` coordinates of an eigenbasis vector and zeroes the rest.
inline VectorXd encode_pcc(const VectorXd& x, const PccPlan& plan) {
    detail::require(x.size() == plan.basis.rows(), "input dimension does not match the plan");
    VectorXd out = VectorXd::Zero(x.size());
    out.head(plan.kept) = x.head(plan.kept);
    return out;
}

inline MatrixXd encode_pcc_batch(const MatrixXd& x, const PccPlan& plan) {
    detail::require(x.cols() == plan.basis.rows(), "input dimension does not match the plan");
    MatrixXd out = MatrixXd::Zero(x.rows(), x.cols());
    out.leftCols(plan.kept) = x.leftCols(plan.kept);
    return out;
}

/// Surviving blocks after truncation. The anomaly is in world coordinates.
inline DistortedPair pcc_distorted_pair(const CovarianceSpec& source, const MatrixXd& anomaly_world,
                                        const PccPlan& plan) {
    detail::require(plan.kept > 0, "truncation keeps no components");
    detail::require(plan.kept <= source.dim(), "plan does not match the source");
    const MatrixXd ko = to_eigenbasis(anomaly_world, source);
    return DistortedPair::from_blocks(plan.hat_ok.matrix(), ko.topLeftCorner(plan.kept, plan.kept));
}

/// Uniform mid-rise quantizer with per-component clipping range [-half_range, half_range).
struct QuantizerSpec {
    int bits = 16;
    VectorXd half_range;

    double step(Index j) const { return 2.0 * half_range(j) / std::ldexp(1.0, bits); }
    std::uint64_t levels() const { return std::uint64_t{1} << bits; }
};

/// Clipping at k_sigma standard deviations. Components with zero deviation carry a
/// constant and get a unit range so the step stays positive.
inline QuantizerSpec make_quantizer(const VectorXd& std_devs, int bits = 16, double k_sigma = 6.0) {
    detail::require(bits >= 1 && bits <= 48, "bit depth must lie in [1, 48]");
    detail::require(k_sigma > 0.0, "clipping multiple must be positive");
    QuantizerSpec spec;
    spec.bits = bits;
    spec.half_range.resize(std_devs.size());
    for (Index j = 0; j < std_devs.size(); ++j) {
        detail::require(std_devs(j) >= 0.0, "standard deviations must be non-negative");
        spec.half_range(j) = std_devs(j) > 0.0 ? k_sigma * std_devs(j) : 1.0;
    }
    return spec;
}

struct QuantizedVector {
    std::vector<std::uint64_t> codes;
    VectorXd dequantized;
    Index saturated = 0;
};

inline QuantizedVector quantize(const VectorXd& x_hat, const QuantizerSpec& spec) {
    detail::require(x_hat.size() == spec.half_range.size(), "quantizer dimension mismatch");
    const auto top = static_cast<double>(spec.levels() - 1);
    QuantizedVector out;
    out.codes.resize(static_cast<std::size_t>(x_hat.size()));
    out.dequantized.resize(x_hat.size());
    for (Index j = 0; j < x_hat.size(); ++j) {
        const double step = spec.step(j);
        detail::require(step > 0.0, "quantizer step must be positive");
        double level = std::floor((x_hat(j) + spec.half_range(j)) / step);
        if (level < 0.0 || level > top) {
            ++out.saturated;
            level = std::clamp(level, 0.0, top);
        }
        out.codes[static_cast<std::size_t>(j)] = static_cast<std::uint64_t>(level);
        out.dequantized(j) = -spec.half_range(j) + (level + 0.5) * step;
    }
    return out;
}

/// Dequantized rows of a batch; the saturation count is accumulated into `saturated`.
inline MatrixXd quantize_batch(const MatrixXd& x_hat, const QuantizerSpec& spec, Index* saturated = nullptr) {
    MatrixXd out(x_hat.rows(), x_hat.cols());
    Index sat = 0;
    for (Index i = 0; i < x_hat.rows(); ++i) {
        const QuantizedVector q = quantize(x_hat.row(i).transpose(), spec);
        out.row(i) = q.dequantized.transpose();
        sat += q.saturated;
    }
    if (saturated != nullptr) {
        *saturated = sat;
    }
    return out;
}

namespace detail {

inline double log_det_spd(const MatrixXd& m) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

/// Ridge used when none is given: 1e-9 times the mean variance of the joint covariance.
inline double default_mi_regularization(const MatrixXd& joint_cov) {
    return 1e-9 * joint_cov.trace() / static_cast<double>(joint_cov.rows());
}

/**
 * Mutual information in bits between two batches treated as jointly Gaussian:
 * 1/2 log2(|C_xx| |C_hh| / |C_joint|) from the 2n x 2n sample covariance, with
 * `regularization` added to every diagonal. A negative value selects
 * default_mi_regularization.
 */
inline double gaussian_mi_estimate(const GaussianSampleBatch& batch_x, const GaussianSampleBatch& batch_xhat,
                                   double regularization = -1.0) {
    detail::require(batch_x.count() == batch_xhat.count(), "batches must have equal counts");
    const Index n = batch_x.dim();
    const Index m = batch_xhat.dim();
    detail::require(batch_x.count() >= 10 * (n + m), "too few samples for the joint covariance");
    MatrixXd joined(batch_x.count(), n + m);
    joined << batch_x.data(), batch_xhat.data();
    MatrixXd joint = sample_covariance_matrix(GaussianSampleBatch(std::move(joined)));
    const double ridge = regularization < 0.0 ? default_mi_regularization(joint) : regularization;
    joint.diagonal().array() += ridge;
    const double ld_x = detail::log_det_spd(joint.topLeftCorner(n, n));
    const double ld_h = detail::log_det_spd(joint.bottomRightCorner(m, m));
    const double ld_j = detail::log_det_spd(joint);
    return 0.5 * (ld_x + ld_h - ld_j) / std::numbers::ln2;
}

}  // namespace rdad
