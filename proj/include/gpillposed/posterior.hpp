#pragma once

// Gram matrices and the conditional (posterior) moments
//
//   mu(x)  = m(x) + K(x, X)^T (K(X, X) + delta^2 I)^{-1} (Y - m(X))
//   P(x)^2 = K(x, x) - K(x, X)^T (K(X, X) + delta^2 I)^{-1} K(X, x)
//
// together with their lambda -> infinity limits.

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "factorization.hpp"
#include "kernels.hpp"

namespace gpill {

/// Posterior variances below this multiple of sigma^2 are rounding noise
/// (P^2 is a difference of nearly equal numbers at the data) and are
/// reported as exactly zero.
inline constexpr double kVarianceFloor = 1e-10;

struct PosteriorMoments {
    Eigen::MatrixXd queries;  ///< one query point per row
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
    bool degenerate = false;  ///< the lambda = infinity limit; variance is identically zero
};

/// K(X, X) + delta^2 I, symmetrised exactly.
inline Eigen::MatrixXd assemble_gram(const KernelSpec& spec, const Eigen::MatrixXd& points,
                                     double delta = 0.0) {
    if (!(delta >= 0.0)) throw std::invalid_argument("regularisation delta must be non-negative");
    require_distinct_points(points);
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = spec.variance() + delta * delta;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double kij = spec(points.row(i).transpose(), points.row(j).transpose());
            const double kji = spec(points.row(j).transpose(), points.row(i).transpose());
            k(i, j) = k(j, i) = 0.5 * (kij + kji);
        }
    }
    return k;
}

/// K(X, q) for every query row q, one column per query.
inline Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const Eigen::MatrixXd& points,
                                        const Eigen::MatrixXd& queries) {
    if (queries.cols() != points.cols())
        throw std::invalid_argument("query dimension does not match the data");
    Eigen::MatrixXd k(points.rows(), queries.rows());
    for (Eigen::Index j = 0; j < queries.rows(); ++j)
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            k(i, j) = spec(points.row(i).transpose(), queries.row(j).transpose());
    return k;
}

inline Cholesky factorize(const Eigen::MatrixXd& gram) { return Cholesky(gram); }

namespace detail {

inline void require_resolved_mean(const Dataset& data) {
    if (!mean_resolved(data.mean()))
        throw std::invalid_argument(
            "basis mean coefficients are unresolved; call estimate_beta first");
}

inline double apply_variance_floor(double v, double sigma2, double floor = kVarianceFloor) {
    return v <= floor * sigma2 ? 0.0 : v;
}

}  // namespace detail

/// A factorized conditioning problem, reusable across query batches.
class Posterior {
public:
    Posterior(KernelSpec spec, Dataset data, double delta = 0.0)
        : spec_(std::move(spec)),
          data_(std::move(data)),
          delta_(delta),
          chol_(assemble_gram(spec_, data_.points(), delta)) {
        detail::require_resolved_mean(data_);
        weights_ = chol_.solve(data_.residuals());
    }

    [[nodiscard]] const KernelSpec& kernel() const { return spec_; }
    [[nodiscard]] const Dataset& data() const { return data_; }
    [[nodiscard]] const Cholesky& factorization() const { return chol_; }

    [[nodiscard]] PosteriorMoments at(const Eigen::MatrixXd& queries) const {
        const Eigen::MatrixXd kx = cross_covariance(spec_, data_.points(), queries);
        const Eigen::MatrixXd w = chol_.whiten(kx);
        PosteriorMoments out;
        out.queries = queries;
        out.mean.resize(queries.rows());
        out.variance.resize(queries.rows());
        for (Eigen::Index j = 0; j < queries.rows(); ++j) {
            const Point x = queries.row(j).transpose();
            out.mean(j) = evaluate_mean(data_.mean(), x) + kx.col(j).dot(weights_);
            const double v = spec_.variance() - w.col(j).squaredNorm();
            out.variance(j) = detail::apply_variance_floor(v, spec_.variance());
        }
        return out;
    }

    /// P(x, y)^2 without the variance floor.
    [[nodiscard]] double covariance(const Point& x, const Point& y) const {
        Eigen::MatrixXd q(2, x.size());
        q.row(0) = x.transpose();
        q.row(1) = y.transpose();
        const Eigen::MatrixXd w = chol_.whiten(cross_covariance(spec_, data_.points(), q));
        return spec_(x, y) - w.col(0).dot(w.col(1));
    }

private:
    KernelSpec spec_;
    Dataset data_;
    double delta_;
    Cholesky chol_;
    Eigen::VectorXd weights_;
};

inline PosteriorMoments posterior_moments(const KernelSpec& spec, const Dataset& data,
                                          double delta, const Eigen::MatrixXd& queries) {
    return Posterior(spec, data, delta).at(queries);
}

struct ScalarMoments {
    double mean;
    double variance;
};

/// Closed-form lambda -> infinity limit of the regularised moments for a
/// kernel normalised to K -> 1:
///   variance = 1 / (1 + n delta^-2),
///   mean     = m(x) + delta^-2 / (1 + n delta^-2) * sum_i (y_i - m(x_i)).
inline ScalarMoments regularized_flat_limit(double delta, const Dataset& data, const Point& query) {
    if (!(delta > 0.0)) throw std::invalid_argument("regularised flat limit needs delta > 0");
    detail::require_resolved_mean(data);
    const double n = static_cast<double>(data.size());
    const double inv_d2 = 1.0 / (delta * delta);
    const double denom = 1.0 + n * inv_d2;
    return {evaluate_mean(data.mean(), query) + inv_d2 / denom * data.residuals().sum(),
            1.0 / denom};
}

/// Degenerate limit for m-constant data with shift c: mean m(x) + c, zero variance.
inline PosteriorMoments flat_limit_moments(const Dataset& data, double c,
                                           const Eigen::MatrixXd& queries) {
    PosteriorMoments out;
    out.queries = queries;
    out.mean.resize(queries.rows());
    out.variance = Eigen::VectorXd::Zero(queries.rows());
    out.degenerate = true;
    for (Eigen::Index j = 0; j < queries.rows(); ++j)
        out.mean(j) = evaluate_mean(data.mean(), queries.row(j).transpose()) + c;
    return out;
}

/// Column-of-points helper for one-dimensional queries.
inline Eigen::MatrixXd points_1d(std::initializer_list<double> xs) {
    Eigen::MatrixXd p(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) p(i++, 0) = x;
    return p;
}

inline Eigen::MatrixXd linspace_1d(double a, double b, Eigen::Index count) {
    Eigen::MatrixXd p(count, 1);
    if (count == 1) p(0, 0) = a;
    else p.col(0) = Eigen::VectorXd::LinSpaced(count, a, b);
    return p;
}

}  // namespace gpill
