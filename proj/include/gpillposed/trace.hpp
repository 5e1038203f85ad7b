#pragma once

// Objective selection and lambda traces. A trace records a factorization
// failure at a grid point instead of aborting.

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "highprec.hpp"
#include "objectives.hpp"

namespace gpill {

namespace objective {
struct ML {};
struct MLRegularized {
    double delta;
};
struct CV {};
struct CV2 {};
struct MLProfiledSigma {};
/// ML with the basis-mean coefficients re-estimated at every lambda.
struct MLParametricMean {
    double delta = 0.0;
};
}  // namespace objective

using ObjectiveKind = std::variant<objective::ML, objective::MLRegularized, objective::CV,
                                   objective::CV2, objective::MLProfiledSigma,
                                   objective::MLParametricMean>;

inline std::string objective_name(const ObjectiveKind& kind) {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, objective::ML>) return "ml";
            else if constexpr (std::is_same_v<T, objective::MLRegularized>) return "ml-regularized";
            else if constexpr (std::is_same_v<T, objective::CV>) return "cv";
            else if constexpr (std::is_same_v<T, objective::CV2>) return "cv2";
            else if constexpr (std::is_same_v<T, objective::MLProfiledSigma>) return "ml-profiled-sigma";
            else return "ml-parametric-mean";
        },
        kind);
}

/// Parses an objective name; `delta` feeds the regularised variants.
inline ObjectiveKind objective_from_name(const std::string& name, double delta = 0.0) {
    if (name == "ml") return objective::ML{};
    if (name == "ml-regularized") {
        if (!(delta > 0.0)) throw std::invalid_argument("ml-regularized needs delta > 0");
        return objective::MLRegularized{delta};
    }
    if (name == "cv") return objective::CV{};
    if (name == "cv2") return objective::CV2{};
    if (name == "ml-profiled-sigma") return objective::MLProfiledSigma{};
    if (name == "ml-parametric-mean") return objective::MLParametricMean{delta};
    throw std::invalid_argument("unknown objective '" + name + "'");
}

/// The objective in MPFR arithmetic at the context's precision.
inline BigReal evaluate_objective_precise(const ObjectiveKind& kind, const KernelSpec& spec,
                                          const Dataset& data, const PrecisionContext& ctx) {
    return std::visit(
        [&](const auto& k) -> BigReal {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, objective::ML>) {
                return highprec::nll(spec, data, 0.0, ctx);
            } else if constexpr (std::is_same_v<T, objective::MLRegularized>) {
                if (!(k.delta > 0.0)) throw std::invalid_argument("regularised objective needs delta > 0");
                return highprec::nll(spec, data, k.delta, ctx);
            } else if constexpr (std::is_same_v<T, objective::CV>) {
                return highprec::cv_objective(spec, data, ctx);
            } else if constexpr (std::is_same_v<T, objective::CV2>) {
                return highprec::cv2_objective(spec, data, ctx);
            } else if constexpr (std::is_same_v<T, objective::MLProfiledSigma>) {
                return highprec::profile_sigma(spec, data, ctx).profiled_nll;
            } else {
                const auto& basis = std::get<BasisMean>(data.mean());
                const Dataset fitted =
                    data.with_mean(BasisMean{basis.basis, highprec::estimate_beta(spec, data, k.delta, ctx)});
                return highprec::nll(spec, fitted, k.delta, ctx);
            }
        },
        kind);
}

inline double evaluate_objective(const ObjectiveKind& kind, const KernelSpec& spec,
                                 const Dataset& data, const Arithmetic& arith = {}) {
    if (arith.is_extended())
        return evaluate_objective_precise(kind, spec, data, PrecisionContext(*arith.digits)).to_double();
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, objective::ML>) {
                return nll(spec, data, 0.0);
            } else if constexpr (std::is_same_v<T, objective::MLRegularized>) {
                if (!(k.delta > 0.0)) throw std::invalid_argument("regularised objective needs delta > 0");
                return nll(spec, data, k.delta);
            } else if constexpr (std::is_same_v<T, objective::CV>) {
                return cv_objective(spec, data);
            } else if constexpr (std::is_same_v<T, objective::CV2>) {
                return cv2_objective(spec, data);
            } else if constexpr (std::is_same_v<T, objective::MLProfiledSigma>) {
                return profile_sigma(spec, data).profiled_nll;
            } else {
                return nll(spec, with_estimated_mean(spec, data, k.delta), k.delta);
            }
        },
        kind);
}

enum class TraceStatus { Ok, NotPositiveDefinite };

inline std::string_view status_name(TraceStatus s) {
    return s == TraceStatus::Ok ? "ok" : "not_positive_definite";
}

struct ObjectiveTrace {
    std::vector<double> lambdas;
    std::vector<double> values;  ///< NaN where the status is not Ok
    std::vector<TraceStatus> status;
    /// Working-precision values, kept when the trace was evaluated in
    /// extended arithmetic so that comparisons see differences below
    /// double resolution. Empty otherwise.
    std::vector<std::optional<BigReal>> precise;

    [[nodiscard]] std::size_t size() const { return lambdas.size(); }
    [[nodiscard]] bool ok(std::size_t i) const { return status[i] == TraceStatus::Ok; }
    /// Sign of value(i) - value(j) for two Ok entries.
    [[nodiscard]] int compare(std::size_t i, std::size_t j) const {
        if (!precise.empty()) {
            const auto c = *precise[i] <=> *precise[j];
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
        return values[i] < values[j] ? -1 : values[i] > values[j] ? 1 : 0;
    }
    [[nodiscard]] std::size_t finite_count() const {
        std::size_t c = 0;
        for (auto s : status) c += s == TraceStatus::Ok;
        return c;
    }
};

/// Evaluates `kind` at every lambda (the lengthscale of `spec` is replaced).
inline ObjectiveTrace objective_trace(const ObjectiveKind& kind, const KernelSpec& spec,
                                      const Dataset& data, const std::vector<double>& lambdas,
                                      const Arithmetic& arith = {}) {
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("trace lambdas must be strictly increasing");
    ObjectiveTrace t;
    t.lambdas = lambdas;
    t.values.reserve(lambdas.size());
    t.status.reserve(lambdas.size());
    for (double lam : lambdas) {
        try {
            if (arith.is_extended()) {
                const PrecisionContext ctx(*arith.digits);
                BigReal v = evaluate_objective_precise(kind, spec.with_lengthscale(lam), data, ctx);
                t.values.push_back(v.to_double());
                t.precise.emplace_back(std::move(v));
            } else {
                t.values.push_back(evaluate_objective(kind, spec.with_lengthscale(lam), data));
            }
            t.status.push_back(TraceStatus::Ok);
        } catch (const NotPositiveDefinite&) {
            t.values.push_back(std::numeric_limits<double>::quiet_NaN());
            t.status.push_back(TraceStatus::NotPositiveDefinite);
            if (arith.is_extended()) t.precise.emplace_back();
        }
    }
    return t;
}

inline void write_trace_csv(std::ostream& os, const ObjectiveTrace& t) {
    os << "lambda,value,status\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < t.size(); ++i) {
        os << t.lambdas[i] << ',';
        if (t.ok(i)) os << t.values[i];
        else os << "nan";
        os << ',' << status_name(t.status[i]) << '\n';
    }
}

inline ObjectiveTrace read_trace_csv(std::istream& is) {
    ObjectiveTrace t;
    std::string line;
    if (!std::getline(is, line) || line != "lambda,value,status")
        throw std::invalid_argument("trace CSV: expected header 'lambda,value,status'");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string lam, val, st;
        if (!std::getline(row, lam, ',') || !std::getline(row, val, ',') || !std::getline(row, st))
            throw std::invalid_argument("trace CSV line " + std::to_string(lineno) + ": expected 3 fields");
        t.lambdas.push_back(std::stod(lam));
        if (st == "ok") {
            t.values.push_back(std::stod(val));
            t.status.push_back(TraceStatus::Ok);
        } else if (st == "not_positive_definite") {
            t.values.push_back(std::numeric_limits<double>::quiet_NaN());
            t.status.push_back(TraceStatus::NotPositiveDefinite);
        } else {
            throw std::invalid_argument("trace CSV line " + std::to_string(lineno) + ": unknown status '" + st + "'");
        }
    }
    return t;
}

}  // namespace gpill
