#pragma once

// Derivative-free lengthscale estimation on a log-uniform grid, with an
// explicit verdict when the minimiser runs off to lambda = infinity.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "trace.hpp"

namespace gpill {

struct GridSpec {
    double lambda_min = 1e-3;
    double lambda_max = 1e6;
    std::size_t points = 200;

    void validate() const {
        if (!(lambda_min > 0.0) || !std::isfinite(lambda_max))
            throw std::invalid_argument("grid bounds must be positive and finite");
        if (!(lambda_min < lambda_max)) throw std::invalid_argument("grid needs lambda_min < lambda_max");
        if (points < 16) throw std::invalid_argument("grid needs at least 16 points");
    }

    /// Log-uniform lambdas with exact end points.
    [[nodiscard]] std::vector<double> lambdas() const {
        validate();
        std::vector<double> out(points);
        const double a = std::log(lambda_min);
        const double b = std::log(lambda_max);
        for (std::size_t i = 0; i < points; ++i)
            out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
        out.front() = lambda_min;
        out.back() = lambda_max;
        return out;
    }

    [[nodiscard]] GridSpec doubled() const { return {lambda_min, lambda_max, 2 * points}; }

    /// "min:max:points", e.g. "1e-3:1e6:200".
    static GridSpec parse(const std::string& text) {
        std::istringstream is(text);
        std::string a, b, c;
        if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c))
            throw std::invalid_argument("grid must look like MIN:MAX:POINTS, got '" + text + "'");
        GridSpec g{std::stod(a), std::stod(b), static_cast<std::size_t>(std::stoul(c))};
        g.validate();
        return g;
    }

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        os << std::setprecision(17) << lambda_min << ':' << lambda_max << ':' << points;
        return os.str();
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

namespace verdict {
struct Finite {
    double lambda_star;
    double objective_value;
};
/// Evidence for a divergent estimate: the strictly decreasing tail of the trace.
struct DivergesToInfinity {
    std::vector<double> tail_lambdas;
    std::vector<double> tail_values;
};
struct Inconclusive {
    std::string reason;
};
}  // namespace verdict

struct EstimateResult {
    std::variant<verdict::Finite, verdict::DivergesToInfinity, verdict::Inconclusive> verdict;
    ObjectiveTrace trace;

    [[nodiscard]] bool is_finite() const { return std::holds_alternative<verdict::Finite>(verdict); }
    [[nodiscard]] bool diverges() const {
        return std::holds_alternative<verdict::DivergesToInfinity>(verdict);
    }
    [[nodiscard]] bool inconclusive() const {
        return std::holds_alternative<verdict::Inconclusive>(verdict);
    }
    [[nodiscard]] const verdict::Finite& finite() const { return std::get<verdict::Finite>(verdict); }
    [[nodiscard]] std::string_view status() const {
        return is_finite() ? "finite" : diverges() ? "diverges" : "inconclusive";
    }
};

namespace detail {

/// Golden-section search for the minimum of f(exp(t)) on t in [a, b].
/// Points where the objective cannot be evaluated count as +infinity.
template <class F>
std::pair<double, double> golden_section_log(F&& f, double lo, double hi, double rel_tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto eval = [&](double t) {
        try {
            const double v = f(std::exp(t));
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const NotPositiveDefinite&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    const double tol = std::log1p(rel_tol);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
        }
    }
    return fc <= fd ? std::pair{std::exp(c), fc} : std::pair{std::exp(d), fd};
}

}  // namespace detail

/// Number of trailing finite grid points that must decrease strictly for a
/// divergence verdict.
inline std::size_t divergence_tail_length(std::size_t grid_points) {
    return std::max<std::size_t>(5, grid_points / 10);
}

/// Minimises `kind` over the grid.
///
/// * DivergesToInfinity: the grid minimum is the last evaluable grid point
///   and the objective decreases strictly over the last
///   max(5, points / 10) evaluable points.
/// * Finite: an interior grid minimum (ties go to the largest lambda),
///   refined by one golden-section pass between its grid neighbours to a
///   relative lambda tolerance of 1e-3. An objective that is exactly flat
///   in lambda (n = 1) is Finite at its tie-break point, the largest lambda.
/// * Inconclusive: nothing evaluable, or the minimum sits on the evaluable
///   edge without a monotone tail.
inline EstimateResult grid_minimize(const ObjectiveKind& kind, const KernelSpec& spec,
                                    const Dataset& data, const GridSpec& grid,
                                    const Arithmetic& arith = {}) {
    EstimateResult out{verdict::Inconclusive{""}, objective_trace(kind, spec, data, grid.lambdas(), arith)};
    const ObjectiveTrace& t = out.trace;

    std::vector<std::size_t> finite;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.ok(i)) finite.push_back(i);
    if (finite.empty()) {
        out.verdict = verdict::Inconclusive{"objective could not be evaluated at any grid point"};
        return out;
    }

    std::size_t best = finite.front();
    bool flat = true;
    for (std::size_t i : finite) {
        const int c = t.compare(i, best);
        if (c <= 0) best = i;
        if (c != 0) flat = false;
    }

    if (best == finite.back()) {
        if (flat) {
            out.verdict = verdict::Finite{t.lambdas[best], t.values[best]};
            return out;
        }
        const std::size_t tail = divergence_tail_length(grid.points);
        if (finite.size() >= tail) {
            verdict::DivergesToInfinity ev;
            bool decreasing = true;
            for (std::size_t k = finite.size() - tail; k < finite.size(); ++k) {
                const std::size_t i = finite[k];
                ev.tail_lambdas.push_back(t.lambdas[i]);
                ev.tail_values.push_back(t.values[i]);
                if (k > finite.size() - tail && t.compare(i, finite[k - 1]) >= 0) decreasing = false;
            }
            if (decreasing) {
                out.verdict = std::move(ev);
                return out;
            }
        }
        out.verdict = verdict::Inconclusive{
            "grid minimum lies on the last evaluable lambda but the tail is not monotone"};
        return out;
    }

    // Bracket between evaluable grid neighbours.
    const std::size_t left = (best > 0 && t.ok(best - 1)) ? best - 1 : best;
    const std::size_t right = t.ok(best + 1) ? best + 1 : best;
    verdict::Finite result{t.lambdas[best], t.values[best]};
    if (left != right) {
        auto f = [&](double lam) { return evaluate_objective(kind, spec.with_lengthscale(lam), data, arith); };
        const auto [lam, val] =
            detail::golden_section_log(f, t.lambdas[left], t.lambdas[right], 1e-3);
        if (val < result.objective_value) result = {lam, val};
    }
    out.verdict = result;
    return out;
}

struct DeltaScanEntry {
    double delta;
    EstimateResult result;
};

struct DeltaScan {
    std::vector<DeltaScanEntry> entries;
    /// Smallest delta whose estimate diverges, when any does.
    std::optional<double> delta_infinity;
};

/// Log-uniform regularisation grid used when none is given.
inline std::vector<double> default_delta_grid() {
    std::vector<double> d;
    for (int k = 0; k <= 48; ++k) d.push_back(std::pow(10.0, -3.0 + k / 12.0));
    return d;
}

/// Regularised ML estimate lambda_ML^delta for every delta.
inline DeltaScan delta_scan(const KernelSpec& spec, const Dataset& data,
                            const std::vector<double>& deltas, const GridSpec& grid,
                            const Arithmetic& arith = {}) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw std::invalid_argument("delta scan values must be positive");
        if (i > 0 && !(deltas[i] > deltas[i - 1]))
            throw std::invalid_argument("delta scan values must be increasing");
    }
    DeltaScan scan;
    for (double d : deltas) {
        scan.entries.push_back({d, grid_minimize(objective::MLRegularized{d}, spec, data, grid, arith)});
        if (!scan.delta_infinity && scan.entries.back().result.diverges()) scan.delta_infinity = d;
    }
    return scan;
}

inline void write_delta_scan_csv(std::ostream& os, const DeltaScan& scan) {
    os << "delta,lambda_star_or_inf,status\n" << std::setprecision(17);
    for (const auto& e : scan.entries) {
        os << e.delta << ',';
        if (e.result.is_finite()) os << e.result.finite().lambda_star;
        else if (e.result.diverges()) os << "inf";
        else os << "nan";
        os << ',' << e.result.status() << '\n';
    }
}

}  // namespace gpill
