#pragma once

// Coalescence of point evaluations for the one-dimensional Gaussian kernel
// exp(-z^2). As lambda grows, Y_m^T K_lambda(X, X)^{-1} Y_m for constant
// data Y_m = (c, ..., c) approaches D0^T A0^{-1} D0, where D0 = (c, 0, ..., 0)
// and A0 holds the kernel derivatives at the origin. The limit is compared
// with the closed form q(n) and with a direct evaluation at large lambda.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "bigreal.hpp"
#include "dense.hpp"

namespace gpill {

// ---------------------------------------------------------------------------
// Derivative limit

/// (2p)! / p! = (p + 1)(p + 2) ... (2p).
inline mpz_class even_derivative_magnitude(unsigned p) {
    mpz_class v = 1;
    for (unsigned k = p + 1; k <= 2 * p; ++k) v *= k;
    return v;
}

/// A0 for the Gaussian kernel: (2p)!/p! where i + j = 2p, zero where i + j is odd.
inline SquareMatrix<mpq_class> a0_matrix_exact(std::size_t n) {
    if (n < 1) throw std::invalid_argument("A0 needs n >= 1");
    SquareMatrix<mpq_class> a(n, mpq_class(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if ((i + j) % 2 == 0) a(i, j) = mpq_class(even_derivative_magnitude(static_cast<unsigned>((i + j) / 2)));
    return a;
}

inline SquareMatrix<BigReal> a0_matrix(std::size_t n, const PrecisionContext& ctx) {
    const auto exact = a0_matrix_exact(n);
    SquareMatrix<BigReal> a(n, BigReal(ctx));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = BigReal(exact(i, j), ctx);
    return a;
}

/// D0^T A0^{-1} D0 = c^2 (A0^{-1})_{11}, exactly.
inline mpq_class coalesced_datafit_exact(std::size_t n, const mpq_class& c = 1) {
    std::vector<mpq_class> e(n, mpq_class(0));
    e[0] = c;
    const auto sol = eliminate(a0_matrix_exact(n), e);
    return c * sol.solution[0];
}

inline BigReal coalesced_datafit(std::size_t n, double c, const PrecisionContext& ctx) {
    std::vector<BigReal> d(n, BigReal(ctx));
    d[0] = BigReal(c, ctx);
    const auto sol = eliminate(a0_matrix(n, ctx), d);
    return d[0] * sol.solution[0];
}

/// q(n) = prod_{k=0}^{p-1} (3 + 2k) / (p! 2^p) with p = floor((n - 1) / 2).
inline mpq_class q_of_n(std::size_t n) {
    if (n < 1) throw std::invalid_argument("q(n) needs n >= 1");
    const std::size_t p = (n - 1) / 2;
    mpz_class num = 1;
    mpz_class den = 1;
    for (std::size_t k = 0; k < p; ++k) {
        num *= static_cast<unsigned long>(3 + 2 * k);
        den *= static_cast<unsigned long>(2 * (k + 1));
    }
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

// ---------------------------------------------------------------------------
// Large-lambda evaluation

class InsufficientPrecision : public std::runtime_error {
public:
    InsufficientPrecision(std::size_t n, unsigned have, unsigned need)
        : std::runtime_error("n = " + std::to_string(n) + " at this lengthscale needs about " +
                             std::to_string(need) + " decimal digits, but only " + std::to_string(have) +
                             " are configured (raise --digits)"),
          have_(have),
          need_(need) {}
    [[nodiscard]] unsigned configured_digits() const { return have_; }
    [[nodiscard]] unsigned required_digits() const { return need_; }

private:
    unsigned have_;
    unsigned need_;
};

/// Digits kept in reserve beyond the cancellation measured by the pivots.
inline constexpr unsigned kCoalescenceGuardDigits = 20;

namespace detail {

inline SquareMatrix<BigReal> equispaced_gaussian_gram(std::size_t n, const BigReal& lambda,
                                                      const PrecisionContext& ctx) {
    SquareMatrix<BigReal> k(n, BigReal(ctx));
    const BigReal scale = BigReal(static_cast<long>(n + 1), ctx) * lambda;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const BigReal z = BigReal(static_cast<long>(i - j), ctx) / scale;
            k(i, j) = exp(-(z * z));
            if (i != j) k(j, i) = k(i, j);
        }
    return k;
}

/// Decimal digits lost to cancellation: -log10 of the smallest pivot (the
/// diagonal of the Gram is 1).
inline double digits_lost(const std::vector<BigReal>& pivots) {
    double worst = 0.0;
    for (const auto& p : pivots) {
        if (p.is_zero()) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, -log10(abs(p)).to_double());
    }
    return worst;
}

}  // namespace detail

/// Y_m^T K_lambda(X, X)^{-1} Y_m for the Gaussian kernel with sigma = 1,
/// X = {1/(n+1), ..., n/(n+1)} and Y_m = (1, ..., 1). Throws
/// InsufficientPrecision, naming the digits needed, when elimination
/// cancels more digits than the context can spare.
inline BigReal largescale_datafit(std::size_t n, const BigReal& lambda, const PrecisionContext& ctx) {
    if (n < 1) throw std::invalid_argument("largescale data-fit needs n >= 1");
    if (lambda.sign() <= 0) throw std::invalid_argument("lengthscale must be positive");
    std::vector<BigReal> ones(n, BigReal(1L, ctx));
    std::optional<Elimination<BigReal>> sol;
    double lost = std::numeric_limits<double>::infinity();
    try {
        sol = eliminate(detail::equispaced_gaussian_gram(n, lambda, ctx), ones);
        lost = detail::digits_lost(sol->pivots);
    } catch (const SingularMatrix&) {
    }
    const unsigned have = ctx.decimal_digits();
    if (!(lost + kCoalescenceGuardDigits < have)) {
        // Measure the cancellation at increasing precision to report what is needed.
        for (unsigned digits = 2 * have; digits <= 64 * have; digits *= 2) {
            const PrecisionContext wide(digits);
            try {
                const auto trial = eliminate(detail::equispaced_gaussian_gram(n, BigReal(lambda), wide),
                                             std::vector<BigReal>(n, BigReal(1L, wide)));
                const double need = detail::digits_lost(trial.pivots);
                if (need + kCoalescenceGuardDigits < digits)
                    throw InsufficientPrecision(
                        n, have, static_cast<unsigned>(std::ceil(need)) + kCoalescenceGuardDigits);
            } catch (const SingularMatrix&) {
            }
        }
        throw InsufficientPrecision(n, have, 64 * have);
    }
    BigReal sum(ctx);
    for (const auto& v : sol->solution) sum += v;
    return sum;
}

// ---------------------------------------------------------------------------
// Table

inline constexpr std::size_t kConjectureRowCap = 20;
/// Significant digits printed for the large-lambda column.
inline constexpr std::size_t kTableDigits = 15;

struct ConjectureRow {
    std::size_t n;
    mpq_class exact_limit;
    mpq_class q_n;
    BigReal largescale;
    std::size_t matched_digits;
};

inline std::vector<ConjectureRow> verify_conjecture(std::size_t n_max, const BigReal& lambda,
                                                    const PrecisionContext& ctx,
                                                    std::size_t cap = kConjectureRowCap) {
    if (n_max < 1 || n_max > cap)
        throw std::invalid_argument("n_max must lie in [1, " + std::to_string(cap) + "]");
    std::vector<ConjectureRow> rows;
    for (std::size_t n = 1; n <= n_max; ++n) {
        mpq_class exact = coalesced_datafit_exact(n);
        BigReal large = largescale_datafit(n, lambda, ctx);
        const std::size_t matched =
            matched_digits(BigReal(exact, ctx), large, ctx.decimal_digits() - kCoalescenceGuardDigits);
        rows.push_back({n, exact, q_of_n(n), std::move(large), matched});
    }
    return rows;
}

/// Exact decimal expansion when the denominator has only factors 2 and 5,
/// otherwise "p/q".
inline std::string rational_to_string(const mpq_class& q) {
    mpz_class den = q.get_den();
    unsigned twos = 0;
    unsigned fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
    if (den != 1) return q.get_str();
    const unsigned places = std::max(twos, fives);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
    const mpz_class scaled = q.get_num() * scale / q.get_den();
    mpz_class mag = abs(scaled);
    std::string digits = mag.get_str();
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    std::string out = sgn(scaled) < 0 ? "-" : "";
    out += digits.substr(0, digits.size() - places);
    if (places > 0) out += "." + digits.substr(digits.size() - places);
    return out;
}

/// Large-lambda value with `digits` significant digits; digits past the
/// first `matched` ones are wrapped in ** markers.
inline std::string marked_value(const BigReal& v, std::size_t matched, std::size_t digits = kTableDigits) {
    const std::string plain = v.to_string(digits);
    if (matched >= digits) return plain;
    std::size_t seen = 0;
    bool leading = true;
    for (std::size_t i = 0; i < plain.size(); ++i) {
        const char ch = plain[i];
        if (ch < '0' || ch > '9') continue;
        if (leading && ch == '0') continue;
        leading = false;
        if (seen == matched) return plain.substr(0, i) + "**" + plain.substr(i) + "**";
        ++seen;
    }
    return plain;
}

inline void write_conjecture_table(std::ostream& os, const std::vector<ConjectureRow>& rows) {
    std::vector<std::vector<std::string>> cells{
        {"n", "D0^T A0^-1 D0", "q(n)", "Y_m^T K^-1 Y_m", "matched"}};
    for (const auto& r : rows)
        cells.push_back({std::to_string(r.n), rational_to_string(r.exact_limit), rational_to_string(r.q_n),
                         marked_value(r.largescale, r.matched_digits), std::to_string(r.matched_digits)});
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) os << "  ";
            os << (c == 0 ? std::right : std::left) << std::setw(static_cast<int>(width[c])) << row[c];
        }
        os << '\n';
    }
    os << std::right;
}

/// Digits of the large-lambda column in CSV output.
inline constexpr std::size_t kCsvDigits = 40;

inline void write_conjecture_csv(std::ostream& os, const std::vector<ConjectureRow>& rows) {
    os << "n,exact,q,largescale,matched_digits\n";
    for (const auto& r : rows)
        os << r.n << ',' << rational_to_string(r.exact_limit) << ',' << rational_to_string(r.q_n) << ','
           << r.largescale.to_string(kCsvDigits) << ',' << r.matched_digits << '\n';
}

}  // namespace gpill
