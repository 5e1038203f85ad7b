#pragma once

// General linear information for the one-dimensional Matern-3/2 kernel with
// sigma = 1: one derivative functional f'(x_1) followed by point
// evaluations f(x_i). The Gram matrix has the block form
//
//   [ a    b^T     ]     a       = 3 / lambda^2
//   [ b    K(X',X')]     b_{i-1} = -(3 / lambda^2)(x_1 - x_i) exp(-sqrt(3)|x_1 - x_i| / lambda)

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "factorization.hpp"
#include "kernels.hpp"

namespace gpill::lininfo {

struct PointEval {
    double x;
    friend bool operator==(const PointEval&, const PointEval&) = default;
};
struct DerivEval {
    double x;
    friend bool operator==(const DerivEval&, const DerivEval&) = default;
};

using InformationFunctional = std::variant<PointEval, DerivEval>;

inline double location(const InformationFunctional& f) {
    return std::visit([](const auto& g) { return g.x; }, f);
}

/// At most one derivative functional, listed first; all functionals distinct.
inline void validate_layout(const std::vector<InformationFunctional>& fs) {
    if (fs.empty()) throw std::invalid_argument("need at least one information functional");
    for (std::size_t i = 1; i < fs.size(); ++i)
        if (std::holds_alternative<DerivEval>(fs[i]))
            throw std::invalid_argument(
                "only one derivative functional is supported and it must be listed first");
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (fs[i] == fs[j])
                throw std::invalid_argument("information functionals must be pairwise distinct");
}

inline Eigen::MatrixXd assemble_gram_lin(double lambda,
                                         const std::vector<InformationFunctional>& fs) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lengthscale must be positive");
    validate_layout(fs);
    const auto n = static_cast<Eigen::Index>(fs.size());
    const KernelSpec k = KernelSpec::matern(MaternNu::ThreeHalves, 1.0, lambda);
    const double c = 3.0 / (lambda * lambda);
    Eigen::MatrixXd g(n, n);
    const bool has_deriv = std::holds_alternative<DerivEval>(fs.front());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = location(fs[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double xj = location(fs[static_cast<std::size_t>(j)]);
            double v;
            if (has_deriv && i == 0) {
                v = c;
            } else if (has_deriv && j == 0) {
                const double d = xj - xi;
                v = -c * d * std::exp(-std::numbers::sqrt3 * std::abs(d) / lambda);
            } else {
                v = k.at_scaled_distance(std::abs(xi - xj) / lambda);
            }
            g(i, j) = g(j, i) = v;
        }
    }
    return g;
}

/// Y_{L,m}^T K(L, L)^{-1} Y_{L,m} + log det K(L, L), Y_{L,m} = observations - L(m).
inline double nll_lin(double lambda, const std::vector<InformationFunctional>& fs,
                      const Eigen::VectorXd& observations, const Eigen::VectorXd& mean_values) {
    const auto n = static_cast<Eigen::Index>(fs.size());
    if (observations.size() != n || mean_values.size() != n)
        throw std::invalid_argument("observation count must match the functionals");
    const Cholesky chol(assemble_gram_lin(lambda, fs));
    return chol.quadratic_form(observations - mean_values) + chol.logdet();
}

struct AssumptionReport {
    double lambda_small = 0.0;
    double min_eig_at_small_lambda = 0.0;
    double det_at_one = 0.0;
    std::vector<double> tail_lambdas;  ///< grid lambdas >= 1
    std::vector<double> det_tail;
    bool min_eig_pass = false;
    bool det_pass = false;

    [[nodiscard]] bool pass() const { return min_eig_pass && det_pass; }
};

/// Checks numerically that the smallest eigenvalue stays bounded away from
/// zero as lambda -> 0 (>= 0.9 at the smallest grid lambda) and that the
/// determinant vanishes as lambda -> infinity (decreasing over the grid
/// lambdas >= 1, and det at the largest lambda <= 1e-6 * det at lambda = 1).
inline AssumptionReport verify_assumption(const std::vector<InformationFunctional>& fs,
                                          const std::vector<double>& lambdas) {
    if (lambdas.size() < 2 || lambdas.front() > 1e-3 || lambdas.back() < 1e4)
        throw std::invalid_argument("assumption check needs a grid spanning [1e-3, 1e4]");
    AssumptionReport r;
    r.lambda_small = lambdas.front();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_gram_lin(r.lambda_small, fs),
                                                      Eigen::EigenvaluesOnly);
    r.min_eig_at_small_lambda = es.eigenvalues().minCoeff();
    r.min_eig_pass = r.min_eig_at_small_lambda >= 0.9;

    r.det_at_one = assemble_gram_lin(1.0, fs).determinant();
    bool decreasing = true;
    for (double lam : lambdas) {
        if (lam < 1.0) continue;
        const double det = assemble_gram_lin(lam, fs).determinant();
        if (!r.det_tail.empty() && !(det < r.det_tail.back())) decreasing = false;
        r.tail_lambdas.push_back(lam);
        r.det_tail.push_back(det);
    }
    r.det_pass = decreasing && !r.det_tail.empty() && r.det_tail.back() <= 1e-6 * r.det_at_one;
    return r;
}

}  // namespace gpill::lininfo
