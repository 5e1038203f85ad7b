#pragma once

// Arbitrary-precision reals on top of MPFR. Every value carries its own
// precision, taken from the PrecisionContext it was created in; results of
// binary operations use the larger precision of the two operands. There is
// no process-wide default precision.

#include <algorithm>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>
#include <utility>

#include <gmpxx.h>
#include <mpfr.h>

namespace gpill {

class PrecisionContext {
public:
    static constexpr unsigned kDefaultDigits = 500;
    static constexpr unsigned kMinDigits = 50;

    explicit PrecisionContext(unsigned decimal_digits = kDefaultDigits) : digits_(decimal_digits) {
        if (decimal_digits < kMinDigits)
            throw std::invalid_argument("precision must be at least " + std::to_string(kMinDigits) +
                                        " decimal digits");
    }

    [[nodiscard]] unsigned decimal_digits() const { return digits_; }
    /// Binary precision covering the decimal digits plus a few guard bits.
    [[nodiscard]] mpfr_prec_t bits() const {
        return static_cast<mpfr_prec_t>(std::ceil(digits_ * 3.3219280948873623)) + 16;
    }

private:
    unsigned digits_;
};

class BigReal {
public:
    explicit BigReal(const PrecisionContext& ctx) : BigReal(ctx.bits()) { mpfr_set_zero(v_, 1); }
    BigReal(long value, const PrecisionContext& ctx) : BigReal(ctx.bits()) {
        mpfr_set_si(v_, value, MPFR_RNDN);
    }
    BigReal(double value, const PrecisionContext& ctx) : BigReal(ctx.bits()) {
        mpfr_set_d(v_, value, MPFR_RNDN);
    }
    BigReal(const mpq_class& value, const PrecisionContext& ctx) : BigReal(ctx.bits()) {
        mpfr_set_q(v_, value.get_mpq_t(), MPFR_RNDN);
    }
    /// Decimal string such as "100000" or "1e5".
    BigReal(const std::string& text, const PrecisionContext& ctx) : BigReal(ctx.bits()) {
        if (mpfr_set_str(v_, text.c_str(), 10, MPFR_RNDN) != 0)
            throw std::invalid_argument("not a decimal number: '" + text + "'");
    }

    BigReal(const BigReal& o) : BigReal(mpfr_get_prec(o.v_)) { mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigReal(BigReal&& o) noexcept : BigReal(mpfr_get_prec(o.v_)) { mpfr_swap(v_, o.v_); }
    BigReal& operator=(const BigReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigReal& operator=(BigReal&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigReal() { mpfr_clear(v_); }

    [[nodiscard]] mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    [[nodiscard]] const __mpfr_struct* raw() const { return v_; }

    BigReal& operator+=(const BigReal& o) { return apply(mpfr_add, o); }
    BigReal& operator-=(const BigReal& o) { return apply(mpfr_sub, o); }
    BigReal& operator*=(const BigReal& o) { return apply(mpfr_mul, o); }
    BigReal& operator/=(const BigReal& o) { return apply(mpfr_div, o); }

    friend BigReal operator+(BigReal a, const BigReal& b) { return a += b; }
    friend BigReal operator-(BigReal a, const BigReal& b) { return a -= b; }
    friend BigReal operator*(BigReal a, const BigReal& b) { return a *= b; }
    friend BigReal operator/(BigReal a, const BigReal& b) { return a /= b; }
    friend BigReal operator-(BigReal a) {
        mpfr_neg(a.v_, a.v_, MPFR_RNDN);
        return a;
    }

    friend BigReal exp(BigReal a) {
        mpfr_exp(a.v_, a.v_, MPFR_RNDN);
        return a;
    }
    friend BigReal abs(BigReal a) {
        mpfr_abs(a.v_, a.v_, MPFR_RNDN);
        return a;
    }
    friend BigReal sqrt(BigReal a) {
        mpfr_sqrt(a.v_, a.v_, MPFR_RNDN);
        return a;
    }
    friend BigReal log(BigReal a) {
        mpfr_log(a.v_, a.v_, MPFR_RNDN);
        return a;
    }
    friend BigReal log10(BigReal a) {
        mpfr_log10(a.v_, a.v_, MPFR_RNDN);
        return a;
    }

    friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend std::partial_ordering operator<=>(const BigReal& a, const BigReal& b) {
        if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
        const int c = mpfr_cmp(a.v_, b.v_);
        return c < 0 ? std::partial_ordering::less
               : c > 0 ? std::partial_ordering::greater
                       : std::partial_ordering::equivalent;
    }

    [[nodiscard]] bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    [[nodiscard]] int sign() const { return mpfr_sgn(v_); }
    [[nodiscard]] double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    /// The first `digits` significant decimal digits (rounded) and the
    /// decimal exponent e such that value = 0.d1d2... * 10^e.
    [[nodiscard]] std::pair<std::string, long> significand(std::size_t digits) const {
        mpfr_exp_t e = 0;
        char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
        std::string out(s);
        mpfr_free_str(s);
        if (!out.empty() && out.front() == '-') out.erase(out.begin());
        return {out, static_cast<long>(e)};
    }

    /// Fixed-point rendering with `digits` significant digits, e.g. "1.50000000000016".
    [[nodiscard]] std::string to_string(std::size_t digits) const {
        if (is_zero()) return "0";
        auto [sig, e] = significand(digits);
        std::string out = sign() < 0 ? "-" : "";
        if (e <= 0) {
            out += "0." + std::string(static_cast<std::size_t>(-e), '0') + sig;
        } else if (static_cast<std::size_t>(e) >= sig.size()) {
            out += sig + std::string(static_cast<std::size_t>(e) - sig.size(), '0');
        } else {
            out += sig.substr(0, static_cast<std::size_t>(e)) + "." + sig.substr(static_cast<std::size_t>(e));
        }
        return out;
    }

private:
    explicit BigReal(mpfr_prec_t bits) { mpfr_init2(v_, bits); }

    template <class Op>
    BigReal& apply(Op op, const BigReal& o) {
        if (mpfr_get_prec(o.v_) > mpfr_get_prec(v_)) mpfr_prec_round(v_, mpfr_get_prec(o.v_), MPFR_RNDN);
        op(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }

    mpfr_t v_;
};

/// Number of leading significant decimal digits on which a and b agree,
/// compared over at most `max_digits` digits (returned when they agree on
/// all of them).
inline std::size_t matched_digits(const BigReal& a, const BigReal& b, std::size_t max_digits) {
    if (a.sign() != b.sign()) return 0;
    const auto [sa, ea] = a.significand(max_digits + 5);
    const auto [sb, eb] = b.significand(max_digits + 5);
    if (ea != eb) return 0;
    std::size_t k = 0;
    while (k < max_digits && sa[k] == sb[k]) ++k;
    return k;
}

}  // namespace gpill
