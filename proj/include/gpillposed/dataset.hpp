#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kernels.hpp"

namespace gpill {

/// A monomial x_1^{e_1} ... x_d^{e_d}, stored by its exponents.
struct Monomial {
    std::vector<int> exponents;

    [[nodiscard]] double operator()(const Point& x) const {
        if (static_cast<Eigen::Index>(exponents.size()) != x.size())
            throw std::invalid_argument("monomial dimension does not match the point");
        double v = 1.0;
        for (std::size_t i = 0; i < exponents.size(); ++i)
            for (int p = 0; p < exponents[i]; ++p) v *= x(static_cast<Eigen::Index>(i));
        return v;
    }

    [[nodiscard]] int degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

    friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// All monomials in `dimension` variables of total degree <= `max_degree`,
/// graded by degree. The constant monomial comes first unless excluded.
inline std::vector<Monomial> monomials_up_to(int dimension, int max_degree,
                                             bool include_constant = true) {
    if (dimension < 1 || max_degree < 0)
        throw std::invalid_argument("monomial basis needs dimension >= 1 and degree >= 0");
    std::vector<Monomial> out;
    std::vector<int> e(static_cast<std::size_t>(dimension), 0);
    for (int deg = include_constant ? 0 : 1; deg <= max_degree; ++deg) {
        // Enumerate compositions of deg into `dimension` parts, lexicographically descending.
        auto recurse = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == dimension - 1) {
                e[static_cast<std::size_t>(pos)] = remaining;
                out.push_back(Monomial{e});
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                e[static_cast<std::size_t>(pos)] = k;
                self(self, pos + 1, remaining - k);
            }
        };
        recurse(recurse, 0, deg);
    }
    return out;
}

struct ZeroMean {};

struct ConstantMean {
    double c = 0.0;
};

/// m(x) = sum_j beta_j phi_j(x). Coefficients absent means beta is still to
/// be estimated (universal kriging).
struct BasisMean {
    std::vector<Monomial> basis;
    std::optional<Eigen::VectorXd> coefficients;
};

using MeanSpec = std::variant<ZeroMean, ConstantMean, BasisMean>;

inline bool mean_resolved(const MeanSpec& m) {
    const auto* b = std::get_if<BasisMean>(&m);
    return b == nullptr || b->coefficients.has_value();
}

/// Alternant matrix V(X)_{ij} = phi_j(x_i).
inline Eigen::MatrixXd design_matrix(const std::vector<Monomial>& basis,
                                     const Eigen::MatrixXd& points) {
    Eigen::MatrixXd v(points.rows(), static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Point x = points.row(i).transpose();
        for (std::size_t j = 0; j < basis.size(); ++j) v(i, static_cast<Eigen::Index>(j)) = basis[j](x);
    }
    return v;
}

inline double evaluate_mean(const MeanSpec& mean, const Point& x) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ZeroMean>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, ConstantMean>) {
                return m.c;
            } else {
                if (!m.coefficients)
                    throw std::invalid_argument(
                        "basis mean has no coefficients; estimate them first");
                if (m.coefficients->size() != static_cast<Eigen::Index>(m.basis.size()))
                    throw std::invalid_argument("basis mean coefficient count mismatch");
                double v = 0.0;
                for (std::size_t j = 0; j < m.basis.size(); ++j)
                    v += (*m.coefficients)(static_cast<Eigen::Index>(j)) * m.basis[j](x);
                return v;
            }
        },
        mean);
}

/// Throws std::invalid_argument when two rows of `points` are identical.
inline void require_distinct_points(const Eigen::MatrixXd& points) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    // -0.0 == 0.0 under operator<, so signed zeros canonicalise for free.
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index k = 0; k < points.cols(); ++k) {
            if (points(a, k) < points(b, k)) return true;
            if (points(b, k) < points(a, k)) return false;
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!less(order[i - 1], order[i]))
            throw std::invalid_argument("duplicate covariate points at rows " +
                                        std::to_string(order[i - 1]) + " and " +
                                        std::to_string(order[i]));
    }
}

/// Noiseless training data: n distinct points in R^d (one per row), the
/// observed values and the prior mean.
class Dataset {
public:
    Dataset(Eigen::MatrixXd points, Eigen::VectorXd values, MeanSpec mean = ZeroMean{})
        : points_(std::move(points)), values_(std::move(values)), mean_(std::move(mean)) {
        if (points_.rows() < 1) throw std::invalid_argument("dataset must contain at least one point");
        if (points_.cols() < 1) throw std::invalid_argument("dataset points must have dimension >= 1");
        if (values_.size() != points_.rows())
            throw std::invalid_argument("dataset has " + std::to_string(points_.rows()) +
                                        " points but " + std::to_string(values_.size()) +
                                        " values");
        if (!points_.allFinite() || !values_.allFinite())
            throw std::invalid_argument("dataset contains non-finite entries");
        require_distinct_points(points_);
        if (const auto* b = std::get_if<BasisMean>(&mean_)) {
            for (const auto& m : b->basis)
                if (static_cast<Eigen::Index>(m.exponents.size()) != points_.cols())
                    throw std::invalid_argument("basis monomial dimension does not match the data");
        }
    }

    /// One-dimensional convenience constructor.
    static Dataset from_1d(const std::vector<double>& xs, const std::vector<double>& ys,
                           MeanSpec mean = ZeroMean{}) {
        Eigen::MatrixXd p(static_cast<Eigen::Index>(xs.size()), 1);
        for (std::size_t i = 0; i < xs.size(); ++i) p(static_cast<Eigen::Index>(i), 0) = xs[i];
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
        return {std::move(p), std::move(v), std::move(mean)};
    }

    [[nodiscard]] Eigen::Index size() const { return points_.rows(); }
    [[nodiscard]] Eigen::Index dimension() const { return points_.cols(); }
    [[nodiscard]] const Eigen::MatrixXd& points() const { return points_; }
    [[nodiscard]] Point point(Eigen::Index i) const { return points_.row(i).transpose(); }
    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] const MeanSpec& mean() const { return mean_; }

    [[nodiscard]] Dataset with_mean(MeanSpec mean) const { return {points_, values_, std::move(mean)}; }
    [[nodiscard]] Dataset with_values(Eigen::VectorXd values) const { return {points_, std::move(values), mean_}; }

    /// m(X).
    [[nodiscard]] Eigen::VectorXd mean_values() const {
        Eigen::VectorXd m(size());
        for (Eigen::Index i = 0; i < size(); ++i) m(i) = evaluate_mean(mean_, point(i));
        return m;
    }

    /// Y_m = Y - m(X).
    [[nodiscard]] Eigen::VectorXd residuals() const { return values_ - mean_values(); }

    /// The dataset without row k.
    [[nodiscard]] Dataset without(Eigen::Index k) const {
        const Eigen::Index n = size();
        if (n < 2) throw std::invalid_argument("cannot leave out the only data point");
        Eigen::MatrixXd p(n - 1, dimension());
        Eigen::VectorXd v(n - 1);
        for (Eigen::Index i = 0, r = 0; i < n; ++i) {
            if (i == k) continue;
            p.row(r) = points_.row(i);
            v(r) = values_(i);
            ++r;
        }
        return {std::move(p), std::move(v), mean_};
    }

    /// The first k rows.
    [[nodiscard]] Dataset head(Eigen::Index k) const {
        return {points_.topRows(k), values_.head(k), mean_};
    }

private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd values_;
    MeanSpec mean_;
};

}  // namespace gpill
