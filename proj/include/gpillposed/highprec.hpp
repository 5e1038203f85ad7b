#pragma once

// The objectives of objectives.hpp evaluated in MPFR arithmetic. Large
// lengthscales push Gram matrices toward the rank-one matrix of sigma^2's;
// conditional variances then fall far below double-precision resolution
// (about 1e-17 for Matern 5/2 at lambda = 1e4 on unit-spaced points) while
// still being well defined. Kernel values are computed from the exact
// double inputs at the working precision, so the only error left is the
// working precision itself.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bigreal.hpp"
#include "dataset.hpp"
#include "dense.hpp"
#include "factorization.hpp"
#include "kernels.hpp"
#include "objectives.hpp"
#include "posterior.hpp"

namespace gpill {

/// Arithmetic used to evaluate objectives: double, or MPFR with the given
/// number of decimal digits.
struct Arithmetic {
    std::optional<unsigned> digits;

    static Arithmetic extended(unsigned decimal_digits) {
        static_cast<void>(PrecisionContext{decimal_digits});  // validates
        return {decimal_digits};
    }
    [[nodiscard]] bool is_extended() const { return digits.has_value(); }
    friend bool operator==(const Arithmetic&, const Arithmetic&) = default;
};

namespace highprec {

inline BigReal profile(KernelFamily family, MaternNu nu, const BigReal& r, const PrecisionContext& ctx) {
    const BigReal one(1L, ctx);
    switch (family) {
        case KernelFamily::Gaussian: return exp(-(r * r));
        case KernelFamily::InverseQuadratic: return one / (one + r * r);
        case KernelFamily::Matern: break;
    }
    const BigReal s = sqrt(BigReal(static_cast<long>(nu), ctx)) * r;  // sqrt(2 nu) r
    switch (nu) {
        case MaternNu::Half: return exp(-r);
        case MaternNu::ThreeHalves: return (one + s) * exp(-s);
        case MaternNu::FiveHalves: return (one + s + s * s / BigReal(3L, ctx)) * exp(-s);
        case MaternNu::SevenHalves:
            return (one + s + BigReal(2L, ctx) * s * s / BigReal(5L, ctx) + s * s * s / BigReal(15L, ctx)) *
                   exp(-s);
    }
    return BigReal(ctx);
}

inline BigReal kernel(const KernelSpec& spec, const Point& x, const Point& y, const PrecisionContext& ctx) {
    if (x.size() != y.size()) throw std::invalid_argument("kernel evaluated on points of different dimension");
    BigReal d2(ctx);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const BigReal d = BigReal(x(i), ctx) - BigReal(y(i), ctx);
        d2 += d * d;
    }
    const BigReal r = sqrt(d2) / BigReal(spec.lengthscale(), ctx);
    return BigReal(spec.variance(), ctx) * profile(spec.family(), spec.nu(), r, ctx);
}

inline SquareMatrix<BigReal> gram(const KernelSpec& spec, const Eigen::MatrixXd& points, double delta,
                                  const PrecisionContext& ctx) {
    require_distinct_points(points);
    const auto n = static_cast<std::size_t>(points.rows());
    SquareMatrix<BigReal> k(n, BigReal(ctx));
    const BigReal dd = BigReal(delta, ctx) * BigReal(delta, ctx);
    for (std::size_t i = 0; i < n; ++i) {
        const Point xi = points.row(static_cast<Eigen::Index>(i)).transpose();
        k(i, i) = BigReal(spec.variance(), ctx) + dd;
        for (std::size_t j = 0; j < i; ++j) {
            k(i, j) = kernel(spec, xi, points.row(static_cast<Eigen::Index>(j)).transpose(), ctx);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

inline std::vector<BigReal> to_big(const Eigen::VectorXd& v, const PrecisionContext& ctx) {
    std::vector<BigReal> out;
    out.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(v(i), ctx);
    return out;
}

/// Decimal digits of relative pivot size below which a factorization is
/// rejected: the working precision minus this margin.
inline constexpr unsigned kPivotMarginDigits = 10;

/// LDL^T of a Gram matrix; a pivot below 10^-(digits - margin) times its
/// diagonal entry is reported as NotPositiveDefinite, as in double precision.
inline Ldlt<BigReal> factorize(const SquareMatrix<BigReal>& a, const PrecisionContext& ctx) {
    std::optional<Ldlt<BigReal>> f;
    try {
        f.emplace(a);
    } catch (const Ldlt<BigReal>::NotPositive& e) {
        throw NotPositiveDefinite(static_cast<Eigen::Index>(e.index()), std::numeric_limits<double>::infinity());
    }
    const BigReal floor(
        "1e-" + std::to_string(ctx.decimal_digits() - std::min(ctx.decimal_digits(), kPivotMarginDigits)), ctx);
    for (std::size_t k = 0; k < f->size(); ++k)
        if (!(f->pivots()[k] > floor * a(k, k)))
            throw NotPositiveDefinite(static_cast<Eigen::Index>(k), (a(k, k) / f->pivots()[k]).to_double());
    return std::move(*f);
}

inline BigReal logdet(const Ldlt<BigReal>& f, const PrecisionContext& ctx) {
    BigReal s(ctx);
    for (const auto& d : f.pivots()) s += log(d);
    return s;
}

inline BigReal nll(const KernelSpec& spec, const Dataset& data, double delta, const PrecisionContext& ctx) {
    detail::require_resolved_mean(data);
    const auto f = factorize(gram(spec, data.points(), delta, ctx), ctx);
    return f.quadratic_form(to_big(data.residuals(), ctx)) + logdet(f, ctx);
}

/// Leave-one-out residuals and variances from the full inverse:
/// P_{-k}(x_k)^2 = 1 / (K^{-1})_kk and y_k - mu_{-k}(x_k) = (K^{-1} Y_m)_k / (K^{-1})_kk.
struct LeaveOneOutAll {
    std::vector<BigReal> residual;
    std::vector<BigReal> variance;
};

inline LeaveOneOutAll leave_one_out(const KernelSpec& spec, const Dataset& data, const PrecisionContext& ctx) {
    detail::require_two_points(data);
    detail::require_resolved_mean(data);
    const auto n = static_cast<std::size_t>(data.size());
    const auto f = factorize(gram(spec, data.points(), 0.0, ctx), ctx);
    const auto alpha = f.solve(to_big(data.residuals(), ctx));
    LeaveOneOutAll out;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<BigReal> e(n, BigReal(ctx));
        e[k] = BigReal(1L, ctx);
        const BigReal inv_kk = f.solve(e)[k];
        out.residual.push_back(alpha[k] / inv_kk);
        out.variance.push_back(BigReal(1L, ctx) / inv_kk);
    }
    return out;
}

inline BigReal cv_objective(const KernelSpec& spec, const Dataset& data, const PrecisionContext& ctx) {
    const auto loo = leave_one_out(spec, data, ctx);
    BigReal total(ctx);
    for (std::size_t k = 0; k < loo.residual.size(); ++k)
        total += loo.residual[k] * loo.residual[k] / loo.variance[k] + log(loo.variance[k]);
    return total;
}

inline BigReal cv2_objective(const KernelSpec& spec, const Dataset& data, const PrecisionContext& ctx) {
    const auto loo = leave_one_out(spec, data, ctx);
    BigReal total(ctx);
    for (const auto& r : loo.residual) total += r * r;
    return total;
}

struct ProfiledScaleBig {
    BigReal sigma_ml;
    BigReal profiled_nll;
};

inline ProfiledScaleBig profile_sigma(const KernelSpec& spec, const Dataset& data, const PrecisionContext& ctx) {
    detail::require_resolved_mean(data);
    const Eigen::VectorXd ym = data.residuals();
    if ((ym.array() == 0.0).all()) throw DegenerateScale();
    const auto f = factorize(gram(spec.with_sigma(1.0), data.points(), 0.0, ctx), ctx);
    const BigReal q = f.quadratic_form(to_big(ym, ctx));
    const BigReal n(static_cast<long>(data.size()), ctx);
    return {sqrt(q / n), n + logdet(f, ctx) + n * log(q) - n * log(n)};
}

/// Generalised least squares coefficients, as estimate_beta.
inline Eigen::VectorXd estimate_beta(const KernelSpec& spec, const Dataset& data, double delta,
                                     const PrecisionContext& ctx) {
    const auto* basis = std::get_if<BasisMean>(&data.mean());
    if (basis == nullptr) throw std::invalid_argument("estimate_beta needs a basis mean");
    const Eigen::MatrixXd v = design_matrix(basis->basis, data.points());
    const auto q = static_cast<std::size_t>(v.cols());
    if (v.cols() == v.rows()) return gpill::estimate_beta(spec, data, delta);  // independent of the kernel
    if (q == 0 || v.cols() > v.rows()) throw std::invalid_argument("basis size must satisfy 1 <= q <= n");
    const auto f = factorize(gram(spec, data.points(), delta, ctx), ctx);
    const auto y = to_big(data.values(), ctx);
    std::vector<std::vector<BigReal>> cols;  // A^{-1} V, by column
    for (std::size_t j = 0; j < q; ++j) cols.push_back(f.solve(to_big(v.col(static_cast<Eigen::Index>(j)), ctx)));
    SquareMatrix<BigReal> m(q, BigReal(ctx));
    std::vector<BigReal> rhs(q, BigReal(ctx));
    for (std::size_t i = 0; i < q; ++i) {
        const auto vi = to_big(v.col(static_cast<Eigen::Index>(i)), ctx);
        for (std::size_t j = 0; j < q; ++j)
            for (std::size_t r = 0; r < vi.size(); ++r) m(i, j) += vi[r] * cols[j][r];
        for (std::size_t r = 0; r < vi.size(); ++r) rhs[i] += cols[i][r] * y[r];
    }
    try {
        const auto sol = eliminate(std::move(m), std::move(rhs));
        Eigen::VectorXd beta(static_cast<Eigen::Index>(q));
        for (std::size_t i = 0; i < q; ++i) beta(static_cast<Eigen::Index>(i)) = sol.solution[i].to_double();
        return beta;
    } catch (const SingularMatrix&) {
        throw std::invalid_argument("alternant matrix V(X) is rank deficient");
    }
}

/// Conditioning in working precision; moments are returned as doubles.
class Posterior {
public:
    Posterior(const KernelSpec& spec, const Dataset& data, double delta, const PrecisionContext& ctx)
        : spec_(spec), data_(data), ctx_(ctx), f_(factorize(gram(spec, data.points(), delta, ctx), ctx)) {
        detail::require_resolved_mean(data_);
        weights_ = f_.solve(to_big(data_.residuals(), ctx_));
    }

    [[nodiscard]] PosteriorMoments at(const Eigen::MatrixXd& queries) const {
        if (queries.cols() != data_.dimension())
            throw std::invalid_argument("query dimension does not match the data");
        PosteriorMoments out;
        out.queries = queries;
        out.mean.resize(queries.rows());
        out.variance.resize(queries.rows());
        for (Eigen::Index j = 0; j < queries.rows(); ++j) {
            const Point x = queries.row(j).transpose();
            const auto kx = cross(x);
            BigReal m(ctx_);
            for (std::size_t i = 0; i < kx.size(); ++i) m += kx[i] * weights_[i];
            out.mean(j) = evaluate_mean(data_.mean(), x) + m.to_double();
            // Cancellation noise sits near 10^-digits here, not at the double floor.
            out.variance(j) = detail::apply_variance_floor(variance_of(kx).to_double(), spec_.variance(),
                                                           std::pow(10.0, -0.5 * static_cast<double>(ctx_.decimal_digits())));
        }
        return out;
    }

    /// P(x)^2 without the variance floor.
    [[nodiscard]] double variance(const Point& x) const { return variance_of(cross(x)).to_double(); }

private:
    [[nodiscard]] std::vector<BigReal> cross(const Point& x) const {
        std::vector<BigReal> k;
        for (Eigen::Index i = 0; i < data_.size(); ++i) k.push_back(kernel(spec_, data_.point(i), x, ctx_));
        return k;
    }
    [[nodiscard]] BigReal variance_of(const std::vector<BigReal>& kx) const {
        return BigReal(spec_.variance(), ctx_) - f_.quadratic_form(kx);
    }

    KernelSpec spec_;
    Dataset data_;
    PrecisionContext ctx_;
    Ldlt<BigReal> f_;
    std::vector<BigReal> weights_;
};

}  // namespace highprec

inline PosteriorMoments posterior_moments(const KernelSpec& spec, const Dataset& data, double delta,
                                          const Eigen::MatrixXd& queries, const Arithmetic& arith) {
    if (!arith.is_extended()) return posterior_moments(spec, data, delta, queries);
    return highprec::Posterior(spec, data, delta, PrecisionContext(*arith.digits)).at(queries);
}

}  // namespace gpill
