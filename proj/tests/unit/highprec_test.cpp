#include <cmath>

#include <gtest/gtest.h>

#include <gpillposed/highprec.hpp>
#include <gpillposed/trace.hpp>

#include "support/generators.hpp"

using namespace gpill;

namespace {

const auto kM52 = KernelSpec::matern(MaternNu::FiveHalves);
const Dataset kConstant = Dataset::from_1d({1, 1.2, 2}, {1, 1, 1});

}  // namespace

TEST(HighPrecProperty, AgreesWithDoubleWhereDoubleIsAccurate) {
    prop::Gen g(41);
    const PrecisionContext ctx(60);
    for (int trial = 0; trial < 40; ++trial) {
        const auto spec = g.kernel(0.1, 1.0);
        const auto data = g.dataset_1d(g.integer(2, 6), 0.15);
        const double delta = trial % 3 == 0 ? 0.1 : 0.0;
        const double a = nll(spec, data, delta);
        EXPECT_NEAR(highprec::nll(spec, data, delta, ctx).to_double(), a, 1e-9 * (1 + std::abs(a)));
        const double cv = cv_objective(spec, data);
        EXPECT_NEAR(highprec::cv_objective(spec, data, ctx).to_double(), cv, 1e-9 * (1 + std::abs(cv)));
        const double cv2 = cv2_objective(spec, data);
        EXPECT_NEAR(highprec::cv2_objective(spec, data, ctx).to_double(), cv2, 1e-9 * (1 + cv2));
        const auto ps = profile_sigma(spec, data);
        const auto pb = highprec::profile_sigma(spec, data, ctx);
        EXPECT_NEAR(pb.sigma_ml.to_double(), ps.sigma_ml, 1e-9 * ps.sigma_ml);
        EXPECT_NEAR(pb.profiled_nll.to_double(), ps.profiled_nll, 1e-9 * (1 + std::abs(ps.profiled_nll)));
    }
}

TEST(HighPrecProperty, PosteriorAgreesWithDouble) {
    prop::Gen g(42);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = g.kernel(0.1, 1.0);
        const auto data = g.dataset_1d(g.integer(1, 5), 0.15);
        const Eigen::MatrixXd q = linspace_1d(-0.2, 1.2, 9);
        const auto a = posterior_moments(spec, data, 0.0, q);
        const auto b = posterior_moments(spec, data, 0.0, q, Arithmetic::extended(60));
        EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE((a.variance - b.variance).cwiseAbs().maxCoeff(), 1e-9);
    }
}

// Reference values from an independent 50-digit evaluation of the
// leave-one-out formula.
TEST(HighPrec, CrossValidationOnConstantData) {
    const PrecisionContext ctx(80);
    const double expected[] = {-29.889, -57.116, -84.708, -112.335};
    for (int k = 1; k <= 4; ++k) {
        const double v = highprec::cv_objective(kM52.with_lengthscale(std::pow(10.0, k)), kConstant, ctx).to_double();
        EXPECT_NEAR(v, expected[k - 1], 1e-3) << "lambda 1e" << k;
    }
}

TEST(HighPrec, ProfiledValueIsNllAtFittedScale) {
    const PrecisionContext ctx(80);
    const auto data = Dataset::from_1d({1, 1.2, 2}, {1, 1.5, 0.5});
    for (double lam : {0.3, 10.0, 1e4}) {
        const auto spec = kM52.with_lengthscale(lam);
        const auto p = highprec::profile_sigma(spec, data, ctx);
        const auto at = highprec::nll(spec.with_sigma(p.sigma_ml.to_double()), data, 0.0, ctx);
        EXPECT_LE(std::abs((at - p.profiled_nll).to_double()), 1e-12 * (1 + std::abs(at.to_double())));
    }
}

TEST(HighPrec, ResolvesDecreaseBeyondDoubleBreakdown) {
    const ObjectiveTrace t =
        objective_trace(objective::ML{}, kM52, kConstant, {1e4, 1e5, 1e6, 1e7}, Arithmetic::extended(80));
    ASSERT_EQ(t.finite_count(), 4u);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t.compare(i, i - 1), -1);
}

TEST(HighPrec, RejectsFactorizationBelowWorkingPrecision) {
    const PrecisionContext ctx(50);
    EXPECT_THROW(highprec::nll(kM52.with_lengthscale(1e12), kConstant, 0.0, ctx), NotPositiveDefinite);
}

TEST(HighPrec, EstimateBetaMatchesDouble) {
    const auto data = Dataset::from_1d({0, 0.5, 1, 1.5}, {1, 2, 4.5, 5}, BasisMean{monomials_up_to(1, 1), std::nullopt});
    const auto spec = KernelSpec::matern(MaternNu::ThreeHalves, 1.0, 0.7);
    const Eigen::VectorXd a = estimate_beta(spec, data, 0.0);
    const Eigen::VectorXd b = highprec::estimate_beta(spec, data, 0.0, PrecisionContext(60));
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Arithmetic, RejectsTooFewDigits) {
    EXPECT_THROW(Arithmetic::extended(20), std::invalid_argument);
    EXPECT_TRUE(Arithmetic::extended(50).is_extended());
    EXPECT_FALSE(Arithmetic{}.is_extended());
}
