#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "locpar/calibration.hpp"
#include "locpar/error.hpp"
#include "locpar/random.hpp"

using namespace locpar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CalibrationConfig small_config(Family family, double theta, std::size_t k = 4) {
    CalibrationConfig c;
    c.family = family;
    c.theta_star = theta;
    c.grid = GridSpec{5, 1.5, k};
    c.m_reps = 400;
    c.seed = 77;
    return c;
}

/// E|N_m K(theta_hat_m, theta_hat_1)|^r recomputed from raw draws.
std::vector<double> frozen_first_risk(const CalibrationConfig& c, std::uint64_t seed) {
    const auto lengths = c.grid.lengths();
    const std::size_t n = lengths.back();
    std::vector<double> risk(lengths.size(), 0.0);
    for (std::size_t i = 0; i < c.m_reps; ++i) {
        const auto path = sample(c.family, c.theta_star, n, replication_seed(seed, i));
        auto mean_of = [&](std::size_t len) {
            double s = 0.0;
            for (std::size_t j = n - len; j < n; ++j) s += path[j];
            return clamp_to_domain(c.family, s / static_cast<double>(len));
        };
        const double first = mean_of(lengths[0]);
        for (std::size_t m = 0; m < lengths.size(); ++m) {
            risk[m] += std::pow(static_cast<double>(lengths[m]) * kl(c.family, mean_of(lengths[m]), first), c.r);
        }
    }
    for (double& r : risk) r /= static_cast<double>(c.m_reps);
    return risk;
}

}  // namespace

TEST(Budget, LinearInStep) {
    const auto b = risk_budget(0.5, 2.0, 4);
    EXPECT_EQ(b, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
}

TEST(Calibrate, SingleLevelGrid) {
    const auto c = small_config(Family::poisson(), 2.0, 1);
    EXPECT_TRUE(calibrate(Method::LCP, c).cv.z.empty());
    EXPECT_EQ(calibrate(Method::LMS, c).cv.z, (std::vector<double>{0.0}));
    EXPECT_EQ(calibrate(Method::SA, c).cv.z, (std::vector<double>{0.0}));
}

TEST(Calibrate, MeetsBudgetInSample) {
    for (Method m : kAllMethods) {
        const auto report = calibrate(m, small_config(Family::exponential(), 1.5));
        ASSERT_EQ(report.cv.z.size(), cv_length(m, 4));
        for (std::size_t k = 0; k < report.budget.size(); ++k) {
            EXPECT_LE(report.achieved_risk[k], report.budget[k]) << to_string(m) << " step " << k + 1;
        }
        EXPECT_GT(report.r_r, 0.0);
        EXPECT_EQ(report.r_r, parametric_risk_bound(Family::exponential(), 1.5, 16, 0.5, 400, 77));
    }
}

TEST(Calibrate, GaussianTranslationInvariance) {
    for (Method m : kAllMethods) {
        const auto a = calibrate(m, small_config(Family::gaussian(), 0.0));
        const auto b = calibrate(m, small_config(Family::gaussian(), 10.0));
        ASSERT_EQ(a.cv.z.size(), b.cv.z.size());
        for (std::size_t k = 0; k < a.cv.z.size(); ++k) {
            EXPECT_NEAR(a.cv.z[k], b.cv.z[k], 2e-3) << to_string(m);
        }
    }
}

TEST(Calibrate, DeterministicAndThreadIndependent) {
    auto c = small_config(Family::bernoulli(), 0.3);
    const auto a = calibrate(Method::SA, c);
    c.threads = 3;
    const auto b = calibrate(Method::SA, c);
    EXPECT_EQ(a.cv.z, b.cv.z);
    EXPECT_EQ(a.achieved_risk, b.achieved_risk);
}

TEST(Calibrate, LargerLevelGivesSmallerFirstCriticalValue) {
    // z_1 is searched against the same risk curve under a larger budget, so it can
    // only move down. Later components inherit different frozen prefixes and are
    // checked at production settings by the acceptance suite.
    for (FamilyKind kind : {FamilyKind::Gaussian, FamilyKind::Exponential, FamilyKind::Poisson}) {
        for (Method m : kAllMethods) {
            auto c = small_config(Family{kind, 1.0}, 4.0);
            c.alpha = 0.1;
            const auto strict = calibrate(m, c);
            c.alpha = 0.5;
            const auto loose = calibrate(m, c);
            EXPECT_LE(loose.cv.z[0], strict.cv.z[0]) << to_string(m);
        }
    }
}

TEST(Calibrate, FeasibilityIsMonotoneInEachComponent) {
    const auto c = small_config(Family::gaussian(), 0.0);
    const auto report = calibrate(Method::LMS, c);
    const auto budget = report.budget;
    auto ok = [&](const CriticalValues& cv) {
        const auto profile = adaptive_risk(Method::LMS, cv, c, c.seed);
        for (std::size_t m = 0; m < budget.size(); ++m) {
            if (profile.risk[m] > budget[m]) return false;
        }
        return true;
    };
    EXPECT_TRUE(ok(report.cv));
    for (std::size_t k = 0; k < report.cv.z.size(); ++k) {
        auto raised = report.cv;
        raised.z[k] += 0.5;
        EXPECT_TRUE(ok(raised)) << "k=" << k + 1;
    }
}

TEST(Calibrate, InfeasibleSearchRange) {
    auto c = small_config(Family::gaussian(), 0.0);
    c.search.z_max = 0.001;
    try {
        (void)calibrate(Method::LMS, c);
        FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.code(), Errc::Infeasible);
        EXPECT_EQ(e.step(), 1u);
    }
}

TEST(Calibrate, ConfigValidation) {
    auto c = small_config(Family::gaussian(), 0.0);
    c.alpha = 1.5;
    EXPECT_THROW((void)calibrate(Method::LMS, c), Error);
    c = small_config(Family::gaussian(), 0.0);
    c.m_reps = 50;
    EXPECT_THROW((void)calibrate(Method::LMS, c), Error);
    c = small_config(Family::bernoulli(), 1.0);
    EXPECT_THROW((void)calibrate(Method::LMS, c), Error);
}

TEST(AdaptiveRisk, NeverRejectingHasNoPropagationLoss) {
    const auto c = small_config(Family::poisson(), 3.0);
    for (Method m : kAllMethods) {
        const auto profile = adaptive_risk(m, CriticalValues::never_reject(cv_length(m, 4)), c, 5);
        for (double r : profile.risk) EXPECT_EQ(r, 0.0);
    }
}

TEST(AdaptiveRisk, ZeroCriticalValuesFreezeFirstEstimate) {
    const auto c = small_config(Family::gaussian(2.0), 1.0);
    const auto expected = frozen_first_risk(c, 5);
    for (Method m : kAllMethods) {
        const auto profile = adaptive_risk(m, CriticalValues::constant(cv_length(m, 4), 0.0), c, 5);
        for (std::size_t k = 0; k < expected.size(); ++k) {
            EXPECT_NEAR(profile.risk[k], expected[k], 1e-9 * (1.0 + expected[k])) << to_string(m);
        }
    }
}

TEST(AdaptiveRisk, LengthMismatch) {
    const auto c = small_config(Family::gaussian(), 0.0);
    EXPECT_THROW((void)adaptive_risk(Method::LCP, CriticalValues::constant(4, 1.0), c, 1), Error);
}
