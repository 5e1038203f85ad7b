#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gpill {

/// Raised when a Gram matrix is numerically singular. Large lengthscales
/// make every stationary Gram matrix approach the rank-one matrix of
/// Phi(0)'s, so this is an expected outcome, not a bug.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(Eigen::Index pivot, double condition_estimate)
        : std::runtime_error(describe(pivot, condition_estimate)),
          pivot_(pivot),
          condition_estimate_(condition_estimate) {}

    [[nodiscard]] Eigen::Index pivot() const { return pivot_; }
    [[nodiscard]] double condition_estimate() const { return condition_estimate_; }

private:
    static std::string describe(Eigen::Index pivot, double cond) {
        std::ostringstream os;
        os << "matrix is not numerically positive definite (pivot " << pivot
           << ", condition estimate " << cond << ")";
        return os.str();
    }

    Eigen::Index pivot_;
    double condition_estimate_;
};

/// 2-norm condition number from the symmetric eigenvalues; infinity when
/// the smallest eigenvalue is not positive.
inline double condition_estimate(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

/// Lower Cholesky factorization A = L L^T of a symmetric matrix.
///
/// A pivot d_k = A_kk - sum_j L_kj^2 is rejected when d_k <= kRelativePivotFloor * A_kk.
/// Below that floor the pivot is dominated by rounding, the computed
/// log-determinant and quadratic forms carry no correct digits, and the
/// factorization reports failure instead of returning noise. Nothing is
/// ever added to the diagonal.
class Cholesky {
public:
    static constexpr double kRelativePivotFloor = 1e-13;

    explicit Cholesky(const Eigen::MatrixXd& a) : l_(a.rows(), a.cols()) {
        if (a.rows() != a.cols()) throw std::invalid_argument("Cholesky of a non-square matrix");
        const Eigen::Index n = a.rows();
        l_.setZero();
        for (Eigen::Index k = 0; k < n; ++k) {
            double d = a(k, k);
            for (Eigen::Index j = 0; j < k; ++j) d -= l_(k, j) * l_(k, j);
            if (!(d > kRelativePivotFloor * std::abs(a(k, k))) || !std::isfinite(d))
                throw NotPositiveDefinite(k, condition_estimate(a));
            const double lkk = std::sqrt(d);
            l_(k, k) = lkk;
            for (Eigen::Index i = k + 1; i < n; ++i) {
                double s = a(i, k);
                for (Eigen::Index j = 0; j < k; ++j) s -= l_(i, j) * l_(k, j);
                l_(i, k) = s / lkk;
            }
        }
    }

    [[nodiscard]] Eigen::Index size() const { return l_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& lower() const { return l_; }

    /// Twice the sum of the log pivots.
    [[nodiscard]] double logdet() const {
        return 2.0 * l_.diagonal().array().log().sum();
    }

    /// Squared pivots d_k; for a Gram matrix these are the sequential
    /// conditional variances.
    [[nodiscard]] Eigen::VectorXd pivots() const { return l_.diagonal().array().square(); }

    /// L^{-1} b.
    [[nodiscard]] Eigen::VectorXd whiten(const Eigen::VectorXd& b) const {
        return l_.triangularView<Eigen::Lower>().solve(b);
    }
    [[nodiscard]] Eigen::MatrixXd whiten(const Eigen::MatrixXd& b) const {
        return l_.triangularView<Eigen::Lower>().solve(b);
    }

    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        return l_.transpose().triangularView<Eigen::Upper>().solve(whiten(b));
    }
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
        return l_.transpose().triangularView<Eigen::Upper>().solve(whiten(b));
    }

    /// b^T A^{-1} b computed as ||L^{-1} b||^2, never negative.
    [[nodiscard]] double quadratic_form(const Eigen::VectorXd& b) const {
        return whiten(b).squaredNorm();
    }

private:
    Eigen::MatrixXd l_;
};

}  // namespace gpill
