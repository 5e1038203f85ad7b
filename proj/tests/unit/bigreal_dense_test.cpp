#include <gtest/gtest.h>

#include <gpillposed/bigreal.hpp>
#include <gpillposed/dense.hpp>

#include "support/generators.hpp"

using namespace gpill;

TEST(PrecisionContext, Bounds) {
    EXPECT_THROW(PrecisionContext(49), std::invalid_argument);
    EXPECT_EQ(PrecisionContext().decimal_digits(), 500u);
    EXPECT_GE(PrecisionContext(100).bits(), 333);
}

TEST(BigReal, ExactRationalsSurviveArithmetic) {
    const PrecisionContext ctx(100);
    const BigReal third(mpq_class(1, 3), ctx);
    const BigReal one = third * BigReal(3L, ctx);
    EXPECT_GE(matched_digits(one, BigReal(1L, ctx), 95), 95u);
    EXPECT_EQ(BigReal("0.25", ctx), BigReal(0.25, ctx));
    EXPECT_THROW(BigReal("1/4", ctx), std::invalid_argument);
}

TEST(BigReal, ResolvesBelowDoubleEpsilon) {
    const PrecisionContext ctx(60);
    const BigReal a = BigReal(1L, ctx) + BigReal("1e-40", ctx);
    EXPECT_GT(a, BigReal(1L, ctx));
    EXPECT_EQ(a.to_double(), 1.0);
    EXPECT_EQ((a - BigReal(1L, ctx)).to_string(3), "0." + std::string(39, '0') + "100");
}

TEST(BigReal, WiderOperandWins) {
    const PrecisionContext lo(50), hi(200);
    const BigReal x = BigReal(1L, lo) / BigReal(3L, hi);
    EXPECT_EQ(x.precision(), hi.bits());
}

TEST(BigReal, Formatting) {
    const PrecisionContext ctx(60);
    EXPECT_EQ(BigReal("1.5", ctx).to_string(4), "1.500");
    EXPECT_EQ(BigReal("-123.5", ctx).to_string(5), "-123.50");
    EXPECT_EQ(BigReal("1e5", ctx).to_string(3), "100000");
    EXPECT_EQ(BigReal(ctx).to_string(5), "0");
}

TEST(BigReal, MatchedDigits) {
    const PrecisionContext ctx(60);
    EXPECT_EQ(matched_digits(BigReal("1.2345", ctx), BigReal("1.2399", ctx), 20), 3u);
    EXPECT_EQ(matched_digits(BigReal("1.5", ctx), BigReal("1.5", ctx), 20), 20u);
    EXPECT_EQ(matched_digits(BigReal("1.5", ctx), BigReal("-1.5", ctx), 20), 0u);
    EXPECT_EQ(matched_digits(BigReal("9.99", ctx), BigReal("10.01", ctx), 20), 0u);
}

TEST(BigReal, Functions) {
    const PrecisionContext ctx(80);
    const BigReal two(2L, ctx);
    EXPECT_GE(matched_digits(log(exp(two)), two, 75), 75u);
    EXPECT_GE(matched_digits(sqrt(two) * sqrt(two), two, 75), 75u);
    EXPECT_EQ(abs(-two), two);
    EXPECT_EQ(log10(BigReal(1000L, ctx)).to_double(), 3.0);
}

TEST(Dense, RationalSolveIsExact) {
    SquareMatrix<mpq_class> a(2, 0);
    a(0, 0) = 2, a(0, 1) = 1, a(1, 0) = 1, a(1, 1) = 3;
    const auto sol = eliminate(a, std::vector<mpq_class>{1, 2});
    EXPECT_EQ(sol.solution[0], mpq_class(1, 5));
    EXPECT_EQ(sol.solution[1], mpq_class(3, 5));
}

TEST(Dense, SingularDetected) {
    SquareMatrix<mpq_class> a(2, 1);
    EXPECT_THROW(eliminate(a, std::vector<mpq_class>{1, 1}), SingularMatrix);
}

TEST(Dense, PartialPivotingHandlesZeroLeadingEntry) {
    SquareMatrix<mpq_class> a(2, 0);
    a(0, 1) = 1, a(1, 0) = 1;
    EXPECT_THROW(eliminate(a, std::vector<mpq_class>{1, 2}, Pivoting::None), SingularMatrix);
    const auto sol = eliminate(a, std::vector<mpq_class>{1, 2});
    EXPECT_EQ(sol.solution[0], 2);
    EXPECT_EQ(sol.solution[1], 1);
}

// Hilbert matrices: exact rational solve is the oracle for the MPFR paths.
TEST(DenseProperty, BigRealMatchesRationalOracle) {
    const PrecisionContext ctx(120);
    prop::Gen g(61);
    for (std::size_t n = 2; n <= 10; ++n) {
        SquareMatrix<mpq_class> hq(n, 0);
        SquareMatrix<BigReal> hb(n, BigReal(ctx));
        std::vector<mpq_class> bq;
        std::vector<BigReal> bb;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                hq(i, j) = mpq_class(1, static_cast<unsigned long>(i + j + 1));
                hb(i, j) = BigReal(hq(i, j), ctx);
            }
            const long v = g.integer(-9, 9);
            bq.emplace_back(v);
            bb.emplace_back(v, ctx);
        }
        const auto exact = eliminate(hq, bq).solution;
        const auto lu = eliminate(hb, bb).solution;
        const Ldlt<BigReal> ldlt(hb);
        const auto chol = ldlt.solve(bb);
        mpq_class quad = 0;
        for (std::size_t i = 0; i < n; ++i) quad += bq[i] * exact[i];
        for (std::size_t i = 0; i < n; ++i) {
            if (sgn(exact[i]) == 0) continue;
            EXPECT_GE(matched_digits(lu[i], BigReal(exact[i], ctx), 80), 80u) << n;
            EXPECT_GE(matched_digits(chol[i], BigReal(exact[i], ctx), 80), 80u) << n;
        }
        if (sgn(quad) != 0) {
            EXPECT_GE(matched_digits(ldlt.quadratic_form(bb), BigReal(quad, ctx), 80), 80u);
        }
    }
}

TEST(Dense, LdltRejectsIndefinite) {
    const PrecisionContext ctx(60);
    SquareMatrix<BigReal> a(2, BigReal(1L, ctx));
    a(1, 1) = BigReal(0.5, ctx);
    try {
        Ldlt<BigReal> f(a);
        FAIL();
    } catch (const Ldlt<BigReal>::NotPositive& e) {
        EXPECT_EQ(e.index(), 1u);
    }
}
