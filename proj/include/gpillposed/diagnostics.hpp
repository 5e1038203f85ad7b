#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "estimation.hpp"
#include "posterior.hpp"

namespace gpill {

struct ConstancyReport {
    bool is_constant = false;
    std::optional<double> shift_c;
    /// max_i |Y_m,i - c*| for the best constant c*.
    double residual = 0.0;
    std::optional<Eigen::VectorXd> beta_star;
    /// The constant function lies in the span of the basis, so (beta*, c)
    /// is not unique.
    bool non_unique = false;
};

inline constexpr double kDefaultConstancyTolerance = 1e-12;

/// Is Y - m(X) = (c, ..., c)? The best constant in the max-norm is the
/// midrange c* = (max + min) / 2 with residual (max - min) / 2; the data are
/// m-constant when residual <= tol * (1 + max |Y_m|).
inline ConstancyReport check_m_constant(const Dataset& data,
                                        double tol = kDefaultConstancyTolerance) {
    detail::require_resolved_mean(data);
    const Eigen::VectorXd ym = data.residuals();
    const double hi = ym.maxCoeff();
    const double lo = ym.minCoeff();
    ConstancyReport r;
    r.residual = 0.5 * (hi - lo);
    const double c = lo + r.residual;
    r.is_constant = r.residual <= tol * (1.0 + ym.cwiseAbs().maxCoeff());
    if (r.is_constant) r.shift_c = c;
    return r;
}

/// Are there beta*, c with y_i - sum_j beta*_j phi_j(x_i) = c for all i?
/// Solves least squares on the augmented design [V(X) | 1] and applies the
/// max-residual test of check_m_constant. The basis coefficients of the
/// dataset's mean, if any, are ignored.
inline ConstancyReport check_generalized_constant(const Dataset& data,
                                                  double tol = kDefaultConstancyTolerance) {
    const auto* basis = std::get_if<BasisMean>(&data.mean());
    if (basis == nullptr) throw std::invalid_argument("generalized constancy needs a basis mean");
    const Eigen::Index n = data.size();
    const auto q = static_cast<Eigen::Index>(basis->basis.size());
    if (n < q + 1) throw std::invalid_argument("generalized constancy needs n >= q + 1");

    Eigen::MatrixXd a(n, q + 1);
    a.leftCols(q) = design_matrix(basis->basis, data.points());
    a.col(q).setOnes();
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd sol = cod.solve(data.values());
    const Eigen::VectorXd res = data.values() - a * sol;

    ConstancyReport r;
    r.non_unique = cod.rank() < q + 1;
    r.residual = res.cwiseAbs().maxCoeff();
    r.is_constant = r.residual <= tol * (1.0 + data.values().cwiseAbs().maxCoeff());
    if (r.is_constant) {
        r.shift_c = sol(q);
        r.beta_star = sol.head(q);
    }
    return r;
}

struct PredictiveDistribution {
    double mean = 0.0;
    double variance = 0.0;  ///< zero means a point mass
};

/// Hellinger distance between two univariate Gaussians.
///
/// With positive variances the squared distance is
///   1 - sqrt(2) (S1 S2)^{1/4} / sqrt(S1 + S2) exp(-(m1 - m2)^2 / (4 (S1 + S2))),
/// evaluated through log1p/expm1 so that equal arguments give exactly 0.
/// Point masses follow a formal convention: against a non-degenerate
/// Gaussian the distance is 1; two point masses are at distance 0 when
/// their means coincide and 1 otherwise.
inline double hellinger(const PredictiveDistribution& p, const PredictiveDistribution& q) {
    if (p.variance < 0.0 || q.variance < 0.0)
        throw std::invalid_argument("Hellinger distance of a negative variance");
    const bool pd = p.variance == 0.0;
    const bool qd = q.variance == 0.0;
    if (pd && qd) return p.mean == q.mean ? 0.0 : 1.0;
    if (pd || qd) return 1.0;
    const double s = p.variance + q.variance;
    const double ds = std::sqrt(p.variance) - std::sqrt(q.variance);
    const double dm = p.mean - q.mean;
    // log of the Bhattacharyya coefficient; 2 sqrt(S1 S2) / (S1 + S2) = 1 - ds^2 / s.
    const double log_bc = 0.5 * std::log1p(-ds * ds / s) - dm * dm / (4.0 * s);
    const double h2 = -std::expm1(log_bc);
    return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

struct ProbeSide {
    EstimateResult estimate;
    PredictiveDistribution predictive;
    /// "finite", "flat-limit" (m-constant data with a divergent estimate) or
    /// "truncated" (divergent verdict on data that are not m-constant; the
    /// predictive uses the largest evaluable grid lambda).
    std::string source;
    double lambda_used = 0.0;  ///< infinity for the flat limit
};

struct LipschitzProbe {
    ProbeSide a;
    ProbeSide b;
    double distance = 0.0;
    double data_distance = 0.0;  ///< ||Y_a - Y_b||
    double quotient = 0.0;       ///< distance / data_distance (infinity when the data coincide but distance > 0)
};

namespace detail {

inline ProbeSide predictive_at(const KernelSpec& spec, const Dataset& data, const Point& x0,
                               const GridSpec& grid, const Arithmetic& arith) {
    ProbeSide side{grid_minimize(objective::ML{}, spec, data, grid, arith), {}, "", 0.0};
    const Eigen::MatrixXd q = x0.transpose();
    if (side.estimate.is_finite()) {
        side.lambda_used = side.estimate.finite().lambda_star;
        side.source = "finite";
    } else if (side.estimate.diverges()) {
        const auto report = check_m_constant(data);
        if (report.is_constant) {
            const auto m = flat_limit_moments(data, *report.shift_c, q);
            side.predictive = {m.mean(0), m.variance(0)};
            side.lambda_used = std::numeric_limits<double>::infinity();
            side.source = "flat-limit";
            return side;
        }
        side.lambda_used = std::get<verdict::DivergesToInfinity>(side.estimate.verdict).tail_lambdas.back();
        side.source = "truncated";
    } else {
        throw std::runtime_error("lengthscale estimate is inconclusive: " +
                                 std::get<verdict::Inconclusive>(side.estimate.verdict).reason);
    }
    const auto m = posterior_moments(spec.with_lengthscale(side.lambda_used), data, 0.0, q, arith);
    side.predictive = {m.mean(0), m.variance(0)};
    return side;
}

}  // namespace detail

/// Fits lambda by ML for two datasets on the same covariates and compares
/// their predictive distributions at x0 in Hellinger distance.
inline LipschitzProbe lipschitz_probe(const KernelSpec& spec, const Dataset& data_a,
                                      const Dataset& data_b, const Point& x0,
                                      const GridSpec& grid = {}, const Arithmetic& arith = {}) {
    if (data_a.points() != data_b.points())
        throw std::invalid_argument("probe datasets must share their covariates");
    for (Eigen::Index i = 0; i < data_a.size(); ++i)
        if (data_a.point(i) == x0) throw std::invalid_argument("probe point x0 must not be a data point");
    LipschitzProbe p;
    p.a = detail::predictive_at(spec, data_a, x0, grid, arith);
    p.b = detail::predictive_at(spec, data_b, x0, grid, arith);
    p.distance = hellinger(p.a.predictive, p.b.predictive);
    p.data_distance = (data_a.values() - data_b.values()).norm();
    p.quotient = p.data_distance > 0.0 ? p.distance / p.data_distance
                 : p.distance > 0.0    ? std::numeric_limits<double>::infinity()
                                       : 0.0;
    return p;
}

}  // namespace gpill
