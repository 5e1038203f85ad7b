#pragma once

// Lengthscale estimation objectives in double precision. Every objective is
// a function of a fully specified kernel (family, sigma, lambda) and a
// dataset.

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "factorization.hpp"
#include "kernels.hpp"
#include "posterior.hpp"

namespace gpill {

/// Raised by the profiled-scale objective when Y - m(X) = 0, where the
/// maximum likelihood scale is zero.
class DegenerateScale : public std::runtime_error {
public:
    DegenerateScale() : std::runtime_error("Y - m(X) is zero; the ML scale estimate is sigma = 0") {}
};

/// Y_m^T (K + delta^2 I)^{-1} Y_m + log det (K + delta^2 I).
inline double nll(const KernelSpec& spec, const Dataset& data, double delta = 0.0) {
    detail::require_resolved_mean(data);
    const Cholesky chol(assemble_gram(spec, data.points(), delta));
    return chol.quadratic_form(data.residuals()) + chol.logdet();
}

/// The data-fit part of nll alone.
inline double datafit(const KernelSpec& spec, const Dataset& data, double delta = 0.0) {
    detail::require_resolved_mean(data);
    return Cholesky(assemble_gram(spec, data.points(), delta)).quadratic_form(data.residuals());
}

struct RecursiveTerms {
    Eigen::VectorXd datafit;     ///< ((y_{k+1} - m(x_{k+1}) - s_k(x_{k+1})) / P_k(x_{k+1}))^2
    Eigen::VectorXd complexity;  ///< log P_k(x_{k+1})^2

    [[nodiscard]] double total() const { return datafit.sum() + complexity.sum(); }
};

/// Sequential decomposition of the unregularised nll: term k conditions on
/// the first k points in the dataset's order and predicts point k + 1.
/// Individual terms depend on the ordering, their sum does not.
inline RecursiveTerms nll_recursive(const KernelSpec& spec, const Dataset& data) {
    detail::require_resolved_mean(data);
    const Eigen::Index n = data.size();
    const Eigen::VectorXd ym = data.residuals();
    RecursiveTerms out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Point x = data.point(k);
        double s = 0.0;
        double p2 = spec(x, x);
        if (k > 0) {
            const Eigen::MatrixXd prefix = data.points().topRows(k);
            const Cholesky chol(assemble_gram(spec, prefix, 0.0));
            const Eigen::VectorXd kx = cross_covariance(spec, prefix, x.transpose()).col(0);
            s = kx.dot(chol.solve(Eigen::VectorXd(ym.head(k))));
            p2 -= chol.quadratic_form(kx);
        }
        if (!(p2 > 0.0)) throw NotPositiveDefinite(k, std::numeric_limits<double>::infinity());
        const double z = (ym(k) - s);
        out.datafit(k) = z * z / p2;
        out.complexity(k) = std::log(p2);
    }
    return out;
}

namespace detail {

struct LeaveOneOut {
    double mean;
    double variance;
};

/// Posterior at x_k from the data without x_k, variance unfloored.
inline LeaveOneOut leave_one_out(const KernelSpec& spec, const Dataset& data, Eigen::Index k) {
    const Posterior post(spec, data.without(k));
    const Point x = data.point(k);
    const Eigen::MatrixXd q = x.transpose();
    const double mean = post.at(q).mean(0);
    const double var = post.covariance(x, x);
    if (!(var > 0.0)) throw NotPositiveDefinite(k, std::numeric_limits<double>::infinity());
    return {mean, var};
}

inline void require_two_points(const Dataset& data) {
    if (data.size() < 2)
        throw std::invalid_argument("leave-one-out objectives need at least two data points");
}

}  // namespace detail

/// sum_k ((y_k - mu_{-k}(x_k)) / P_{-k}(x_k))^2 + log P_{-k}(x_k)^2.
inline double cv_objective(const KernelSpec& spec, const Dataset& data) {
    detail::require_two_points(data);
    detail::require_resolved_mean(data);
    double total = 0.0;
    for (Eigen::Index k = 0; k < data.size(); ++k) {
        const auto loo = detail::leave_one_out(spec, data, k);
        const double e = data.values()(k) - loo.mean;
        total += e * e / loo.variance + std::log(loo.variance);
    }
    return total;
}

/// sum_k (y_k - mu_{-k}(x_k))^2.
inline double cv2_objective(const KernelSpec& spec, const Dataset& data) {
    detail::require_two_points(data);
    detail::require_resolved_mean(data);
    double total = 0.0;
    for (Eigen::Index k = 0; k < data.size(); ++k) {
        const Posterior post(spec, data.without(k));
        const double e = data.values()(k) - post.at(data.point(k).transpose()).mean(0);
        total += e * e;
    }
    return total;
}

struct ProfiledScale {
    double sigma_ml;
    double profiled_nll;
};

/// Closed-form scale estimate sigma_ML(lambda) = sqrt(Y_m^T K_lambda^{-1} Y_m / n)
/// with K_lambda the unit-scale Gram, and the objective at that scale,
///   n + log det K_lambda + n log(Y_m^T K_lambda^{-1} Y_m) - n log n.
/// The sigma of `spec` is ignored.
inline ProfiledScale profile_sigma(const KernelSpec& spec, const Dataset& data) {
    detail::require_resolved_mean(data);
    const Eigen::VectorXd ym = data.residuals();
    if ((ym.array() == 0.0).all()) throw DegenerateScale();
    const Cholesky chol(assemble_gram(spec.with_sigma(1.0), data.points(), 0.0));
    const double q = chol.quadratic_form(ym);
    const double n = static_cast<double>(data.size());
    return {std::sqrt(q / n), n + chol.logdet() + n * std::log(q) - n * std::log(n)};
}

/// Generalised least squares coefficients of a basis mean,
///   beta = [V^T A^{-1} V]^{-1} V^T A^{-1} Y,  A = K + delta^2 I.
/// When the basis is as large as the data this is the exact solve V^{-1} Y.
inline Eigen::VectorXd estimate_beta(const KernelSpec& spec, const Dataset& data,
                                     double delta = 0.0) {
    const auto* basis = std::get_if<BasisMean>(&data.mean());
    if (basis == nullptr) throw std::invalid_argument("estimate_beta needs a basis mean");
    const Eigen::MatrixXd v = design_matrix(basis->basis, data.points());
    const Eigen::Index n = v.rows();
    const Eigen::Index q = v.cols();
    if (q == 0 || q > n)
        throw std::invalid_argument("basis size must satisfy 1 <= q <= n");
    if (q == n) {
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
        if (!lu.isInvertible()) throw std::invalid_argument("alternant matrix V(X) is singular");
        return lu.solve(data.values());
    }
    const Cholesky chol(assemble_gram(spec, data.points(), delta));
    const Eigen::MatrixXd vt = chol.whiten(v);
    const Eigen::VectorXd yt = chol.whiten(data.values());
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vt);
    if (qr.rank() < q) throw std::invalid_argument("alternant matrix V(X) is rank deficient");
    return qr.solve(yt);
}

/// The dataset with its basis-mean coefficients replaced by estimate_beta.
inline Dataset with_estimated_mean(const KernelSpec& spec, const Dataset& data, double delta = 0.0) {
    const auto& basis = std::get<BasisMean>(data.mean());
    return data.with_mean(BasisMean{basis.basis, estimate_beta(spec, data, delta)});
}

}  // namespace gpill
