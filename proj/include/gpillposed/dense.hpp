#pragma once

// Small dense linear algebra over scalar types Eigen does not know about:
// exact rationals (mpq_class) and arbitrary-precision reals (BigReal).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "bigreal.hpp"

namespace gpill {

/// Square row-major matrix.
template <class T>
class SquareMatrix {
public:
    SquareMatrix(std::size_t n, const T& fill) : n_(n), a_(n * n, fill) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<T> a_;
};

inline bool is_zero(const mpq_class& q) { return sgn(q) == 0; }
inline bool is_zero(const BigReal& x) { return x.is_zero(); }
inline bool is_positive(const mpq_class& q) { return sgn(q) > 0; }
inline bool is_positive(const BigReal& x) { return x.sign() > 0; }

enum class Pivoting { None, Partial };

template <class T>
struct Elimination {
    std::vector<T> solution;
    std::vector<T> pivots;  ///< in elimination order
};

class SingularMatrix : public std::runtime_error {
public:
    explicit SingularMatrix(std::size_t step)
        : std::runtime_error("matrix is singular (zero pivot at step " + std::to_string(step) + ")"),
          step_(step) {}
    [[nodiscard]] std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Gaussian elimination for A x = b. Without pivoting, the pivots of a
/// symmetric matrix are all positive exactly when it is positive definite.
template <class T>
Elimination<T> eliminate(SquareMatrix<T> a, std::vector<T> b, Pivoting pivoting = Pivoting::Partial) {
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("right-hand side has the wrong length");
    std::vector<T> pivots;
    pivots.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (pivoting == Pivoting::Partial) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (abs(a(i, k)) > abs(a(p, k))) p = i;
            if (p != k) {
                for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(p, j));
                std::swap(b[k], b[p]);
            }
        }
        if (is_zero(a(k, k))) throw SingularMatrix(k);
        pivots.push_back(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (is_zero(a(i, k))) continue;
            const T f = a(i, k) / a(k, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j) b[k] -= a(k, j) * b[j];
        b[k] /= a(k, k);
    }
    return {std::move(b), std::move(pivots)};
}

/// A = L D L^T with unit lower L (stored below the diagonal), for symmetric positive definite A.
/// Construction fails with the index of the first pivot that is not
/// positive.
template <class T>
class Ldlt {
public:
    class NotPositive : public std::runtime_error {
    public:
        explicit NotPositive(std::size_t k)
            : std::runtime_error("LDL^T pivot " + std::to_string(k) + " is not positive"), k_(k) {}
        [[nodiscard]] std::size_t index() const { return k_; }

    private:
        std::size_t k_;
    };

    explicit Ldlt(SquareMatrix<T> a) : l_(std::move(a)) {
        const std::size_t n = l_.size();
        d_.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            T dk = l_(k, k);
            for (std::size_t j = 0; j < k; ++j) dk -= l_(k, j) * l_(k, j) * d_[j];
            if (!is_positive(dk)) throw NotPositive(k);
            for (std::size_t i = k + 1; i < n; ++i) {
                T s = l_(i, k);
                for (std::size_t j = 0; j < k; ++j) s -= l_(i, j) * l_(k, j) * d_[j];
                l_(i, k) = s / dk;
            }
            d_.push_back(std::move(dk));
        }
    }

    [[nodiscard]] std::size_t size() const { return d_.size(); }
    [[nodiscard]] const std::vector<T>& pivots() const { return d_; }

    /// L^{-1} b.
    [[nodiscard]] std::vector<T> forward(std::vector<T> b) const {
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) b[i] -= l_(i, j) * b[j];
        return b;
    }

    [[nodiscard]] std::vector<T> solve(const std::vector<T>& b) const {
        std::vector<T> z = forward(b);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] /= d_[i];
        for (std::size_t i = z.size(); i-- > 0;)
            for (std::size_t j = i + 1; j < z.size(); ++j) z[i] -= l_(j, i) * z[j];
        return z;
    }

    /// b^T A^{-1} b = sum_k (L^{-1} b)_k^2 / d_k.
    [[nodiscard]] T quadratic_form(const std::vector<T>& b) const {
        const std::vector<T> z = forward(b);
        T s = z[0] * z[0] / d_[0];
        for (std::size_t i = 1; i < z.size(); ++i) s += z[i] * z[i] / d_[i];
        return s;
    }

private:
    SquareMatrix<T> l_;
    std::vector<T> d_;
};

}  // namespace gpill
