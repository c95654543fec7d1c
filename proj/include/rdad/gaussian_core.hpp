#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdad/errors.hpp"

namespace rdad {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * Symmetric positive-semidefinite matrix held in eigen form.
 *
 * Eigenvalues are sorted in descending order and the columns of basis() are the
 * matching orthonormal eigenvectors, so matrix() = basis * diag(eigenvalues) * basis^T.
 * Diagonal covariances keep a permutation (usually the identity) as basis, which
 * makes their reconstruction exact.
 */
class CovarianceSpec {
public:
    CovarianceSpec() = default;

    /// Eigen form of a symmetric PSD matrix. Entries of order -1e-10 * scale in the
    /// spectrum are treated as round-off and clamped to zero.
    static CovarianceSpec from_matrix(const MatrixXd& m) {
        detail::require(m.rows() == m.cols(), "covariance must be square");
        if (m.rows() == 0) {
            return {};
        }
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        detail::require(((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale),
                        "covariance must be symmetric");
        const MatrixXd off = m - MatrixXd(m.diagonal().asDiagonal());
        if (off.cwiseAbs().maxCoeff() == 0.0) {
            return from_diagonal(m.diagonal());
        }
        const MatrixXd sym = 0.5 * (m + m.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> solver(sym);
        if (solver.info() != Eigen::Success) {
            throw NumericError("symmetric eigensolver did not converge");
        }
        // Solver output is ascending; reverse it with a stable sort so ties keep a
        // reproducible order.
        const VectorXd& ascending = solver.eigenvalues();
        std::vector<Index> order(static_cast<std::size_t>(ascending.size()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return ascending(a) > ascending(b); });
        VectorXd values(ascending.size());
        MatrixXd basis(sym.rows(), sym.cols());
        for (Index k = 0; k < values.size(); ++k) {
            values(k) = ascending(order[static_cast<std::size_t>(k)]);
            basis.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
        }
        return from_eigen(std::move(values), std::move(basis), scale);
    }

    /// Diagonal covariance; entries need not be sorted.
    static CovarianceSpec from_diagonal(const VectorXd& diag) {
        const Index n = diag.size();
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return diag(a) > diag(b); });
        VectorXd values(n);
        MatrixXd basis = MatrixXd::Zero(n, n);
        for (Index k = 0; k < n; ++k) {
            const Index src = order[static_cast<std::size_t>(k)];
            values(k) = diag(src);
            basis(src, k) = 1.0;
        }
        const double scale = n == 0 ? 1.0 : std::max(1.0, diag.cwiseAbs().maxCoeff());
        return from_eigen(std::move(values), std::move(basis), scale);
    }

    /// Builds from an explicit spectrum and basis; the spectrum is re-sorted if needed.
    static CovarianceSpec from_eigen(VectorXd eigenvalues, MatrixXd basis) {
        const double scale = eigenvalues.size() == 0 ? 1.0 : std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
        detail::require(basis.rows() == eigenvalues.size() && basis.cols() == eigenvalues.size(),
                        "basis and spectrum dimensions differ");
        const Index n = eigenvalues.size();
        if (n > 0) {
            const double dev = (basis.transpose() * basis - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
            detail::require(dev <= 1e-10, "basis is not orthonormal");
        }
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return eigenvalues(a) > eigenvalues(b); });
        VectorXd values(n);
        MatrixXd sorted(n, n);
        for (Index k = 0; k < n; ++k) {
            values(k) = eigenvalues(order[static_cast<std::size_t>(k)]);
            sorted.col(k) = basis.col(order[static_cast<std::size_t>(k)]);
        }
        return from_eigen(std::move(values), std::move(sorted), scale);
    }

    Index dim() const { return eigenvalues_.size(); }
    const VectorXd& eigenvalues() const { return eigenvalues_; }
    const MatrixXd& basis() const { return basis_; }

    MatrixXd matrix() const {
        MatrixXd m = basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
        return 0.5 * (m + m.transpose());
    }

    double trace() const { return eigenvalues_.sum(); }
    double max_eigenvalue() const { return dim() == 0 ? 0.0 : eigenvalues_(0); }
    double min_eigenvalue() const { return dim() == 0 ? 0.0 : eigenvalues_(dim() - 1); }

private:
    static CovarianceSpec from_eigen(VectorXd values, MatrixXd basis, double scale) {
        for (Index k = 0; k < values.size(); ++k) {
            if (!std::isfinite(values(k))) {
                throw DomainError("covariance has non-finite eigenvalues");
            }
            if (values(k) < 0.0) {
                if (values(k) < -1e-10 * scale) {
                    throw DomainError("covariance is not positive semidefinite");
                }
                values(k) = 0.0;
            }
        }
        CovarianceSpec spec;
        spec.eigenvalues_ = std::move(values);
        spec.basis_ = std::move(basis);
        return spec;
    }

    VectorXd eigenvalues_;
    MatrixXd basis_;
};

/// Row-major batch of i.i.d. instances: data() is count x dim.
class GaussianSampleBatch {
public:
    GaussianSampleBatch() = default;

    explicit GaussianSampleBatch(MatrixXd data) : data_(std::move(data)) {
        detail::require(data_.allFinite(), "sample batch contains non-finite values");
    }

    Index dim() const { return data_.cols(); }
    Index count() const { return data_.rows(); }
    const MatrixXd& data() const { return data_; }

private:
    MatrixXd data_;
};

/// Eigen form of the n x n Toeplitz matrix omega^|j-k|.
inline CovarianceSpec ar1_covariance(double omega, Index n) {
    detail::require(omega >= 0.0 && omega < 1.0, "omega must lie in [0, 1)");
    detail::require(n >= 1, "dimension must be positive");
    MatrixXd m(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index k = 0; k < n; ++k) {
            m(j, k) = std::pow(omega, static_cast<double>(std::abs(j - k)));
        }
    }
    return CovarianceSpec::from_matrix(m);
}

/// tr(S^2) / tr(S)^2 - 1/n; depends on the spectrum only.
inline double localization(const VectorXd& eigenvalues) {
    const double tr = eigenvalues.sum();
    detail::require(eigenvalues.size() > 0 && tr > 0.0, "localization needs a positive trace");
    const double n = static_cast<double>(eigenvalues.size());
    return eigenvalues.squaredNorm() / (tr * tr) - 1.0 / n;
}

inline double localization(const CovarianceSpec& cov) { return localization(cov.eigenvalues()); }

/// Bisection for the AR(1) parameter whose covariance has the requested localization.
inline double solve_omega_for_localization(double target, Index n, double tol) {
    detail::require(n >= 1, "dimension must be positive");
    const double max_loc = 1.0 - 1.0 / static_cast<double>(n);
    detail::require(target >= 0.0 && target < max_loc, "target localization out of range");
    detail::require(tol > 0.0, "tolerance must be positive");

    auto loc_at = [n](double omega) { return localization(ar1_covariance(omega, n)); };
    if (std::abs(loc_at(0.0) - target) <= tol) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0 - 1e-12;
    if (loc_at(hi) < target - tol) {
        throw NumericError("target localization not reachable with omega < 1");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double value = loc_at(mid);
        if (std::abs(value - target) <= tol) {
            return mid;
        }
        (value < target ? lo : hi) = mid;
    }
    throw NumericError("localization bisection did not converge");
}

/// Draws `count` rows from N(0, cov) via the square root U * diag(sqrt(lambda)).
/// Zero-variance directions receive exactly zero.
template <class Rng>
GaussianSampleBatch sample_gaussian(const CovarianceSpec& cov, Index count, Rng& rng) {
    detail::require(count >= 1, "sample count must be positive");
    const Index n = cov.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd z(count, n);
    for (Index i = 0; i < count; ++i) {
        for (Index j = 0; j < n; ++j) {
            z(i, j) = normal(rng);
        }
    }
    const VectorXd root = cov.eigenvalues().cwiseSqrt();
    // x^T = z^T diag(root) U^T, row by row.
    MatrixXd x = (z * root.asDiagonal()) * cov.basis().transpose();
    return GaussianSampleBatch(std::move(x));
}

/// Sample covariance as a dense matrix. With subtract_mean the estimator is the
/// usual unbiased one (divide by count - 1); with the zero-mean convention the raw
/// second moments are divided by count.
inline MatrixXd sample_covariance_matrix(const GaussianSampleBatch& batch, bool subtract_mean = true) {
    detail::require(batch.count() >= 2, "sample covariance needs at least two rows");
    const double count = static_cast<double>(batch.count());
    if (subtract_mean) {
        const Eigen::RowVectorXd mean = batch.data().colwise().mean();
        const MatrixXd centered = batch.data().rowwise() - mean;
        return (centered.transpose() * centered) / (count - 1.0);
    }
    return (batch.data().transpose() * batch.data()) / count;
}

inline CovarianceSpec sample_covariance(const GaussianSampleBatch& batch, bool subtract_mean = true) {
    return CovarianceSpec::from_matrix(sample_covariance_matrix(batch, subtract_mean));
}

/// U^T M U: a world-coordinate matrix expressed in the eigenbasis of `source`.
inline MatrixXd to_eigenbasis(const MatrixXd& world, const CovarianceSpec& source) {
    detail::require(world.rows() == source.dim() && world.cols() == source.dim(), "dimension mismatch");
    MatrixXd m = source.basis().transpose() * world * source.basis();
    return 0.5 * (m + m.transpose());
}

}  // namespace rdad
