#include "locpar/calibration.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "locpar/error.hpp"

namespace locpar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HomogeneousPaths {
    std::vector<StepEstimates> steps;
    std::vector<LcpStatistics> lcp;  // empty unless the method is LCP
};

HomogeneousPaths draw_paths(Method method, const CalibrationConfig& config, std::uint64_t seed) {
    const IntervalGrid grid = config.grid.at(config.grid.largest());
    HomogeneousPaths paths;
    paths.steps.resize(config.m_reps);
    const bool lcp = method == Method::LCP && grid.k_max() >= 2;
    if (lcp) paths.lcp.resize(config.m_reps);
    parallel_for(config.m_reps, config.threads, [&](std::size_t i) {
        const auto data = sample(config.family, config.theta_star, grid.right_edge(),
                                 replication_seed(seed, i));
        paths.steps[i] = step_estimates(config.family, data, grid);
        if (lcp) paths.lcp[i] = lcp_statistics(config.family, data, grid);
    });
    return paths;
}

AdaptiveResult run_on_path(Method method, const CalibrationConfig& config,
                           const HomogeneousPaths& paths, std::size_t i, const CriticalValues& cv) {
    switch (method) {
        case Method::LMS: return lms_select(config.family, paths.steps[i], cv);
        case Method::LCP: return lcp_select(paths.steps[i], paths.lcp[i], cv);
        case Method::SA: return sa_run(config.family, paths.steps[i], cv, config.kernel);
    }
    throw Error(Errc::InvalidArgument, "unknown method");
}

RiskProfile evaluate(Method method, const CalibrationConfig& config, const HomogeneousPaths& paths,
                     const CriticalValues& cv) {
    const std::size_t K = config.grid.k_max;
    const std::size_t M = paths.steps.size();
    // losses[i * K + m]
    std::vector<double> losses(M * K, 0.0);
    const bool trivial = method == Method::LCP && K < 2;
    if (!trivial) {
        parallel_for(M, config.threads, [&](std::size_t i) {
            const auto& steps = paths.steps[i];
            const AdaptiveResult res = run_on_path(method, config, paths, i, cv);
            for (std::size_t m = 0; m < K; ++m) {
                const double lr = static_cast<double>(steps.lengths[m]) *
                                  kl(config.family, steps.estimates[m], res.trajectory[m]);
                losses[i * K + m] = std::pow(lr, config.r);
            }
        });
    }
    RiskProfile profile;
    profile.risk.assign(K, 0.0);
    profile.standard_error.assign(K, 0.0);
    const double dm = static_cast<double>(M);
    for (std::size_t m = 0; m < K; ++m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < M; ++i) sum += losses[i * K + m];
        const double mean = sum / dm;
        double ss = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double d = losses[i * K + m] - mean;
            ss += d * d;
        }
        profile.risk[m] = mean;
        profile.standard_error[m] = M > 1 ? std::sqrt(ss / (dm - 1.0) / dm) : 0.0;
    }
    return profile;
}

bool within_budget(const RiskProfile& profile, const std::vector<double>& budget) {
    for (std::size_t m = 0; m < budget.size(); ++m) {
        if (profile.risk[m] > budget[m]) return false;
    }
    return true;
}

}  // namespace

void validate(const CalibrationConfig& config) {
    validate(config.family);
    require_domain(config.family, config.theta_star);
    (void)config.grid.lengths();  // throws BadRatio / InvalidArgument
    if (!(config.r > 0.0) || !std::isfinite(config.r)) {
        throw Error(Errc::InvalidArgument, "risk power r must be positive");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw Error(Errc::InvalidArgument, "test level alpha must lie in (0, 1)");
    }
    if (config.m_reps < 100) {
        throw Error(Errc::InvalidArgument, "calibration needs at least 100 replications");
    }
    if (!(config.search.z_max > 0.0) || !std::isfinite(config.search.z_max)) {
        throw Error(Errc::InvalidArgument, "z_max must be positive and finite");
    }
    if (!(config.search.tol > 0.0)) throw Error(Errc::InvalidArgument, "tol must be positive");
    validate(config.kernel);
}

std::vector<double> risk_budget(double alpha, double r_r, std::size_t k_max) {
    std::vector<double> budget(k_max);
    for (std::size_t m = 1; m <= k_max; ++m) {
        budget[m - 1] = alpha * static_cast<double>(m) * r_r / static_cast<double>(k_max);
    }
    return budget;
}

CalibrationReport calibrate(Method method, const CalibrationConfig& config) {
    validate(config);
    const std::size_t K = config.grid.k_max;
    const std::size_t L = cv_length(method, K);

    CalibrationReport report;
    report.method = method;
    report.config = config;
    const RiskEstimate bound = parametric_risk(config.family, config.theta_star,
                                               config.grid.largest(), config.r, config.m_reps,
                                               config.seed, config.threads);
    report.r_r = bound.mean;
    report.r_r_se = bound.standard_error;
    report.budget = risk_budget(config.alpha, report.r_r, K);

    const HomogeneousPaths paths = draw_paths(method, config, config.seed);
    CriticalValues cv{std::vector<double>(L, kInf), config.r, config.alpha};
    auto feasible = [&](std::size_t k, double z) {
        cv.z[k] = z;
        return within_budget(evaluate(method, config, paths, cv), report.budget);
    };

    for (std::size_t k = 0; k < L; ++k) {
        double lo = 0.0;
        double hi = config.search.z_max;
        if (!feasible(k, hi)) {
            throw InfeasibleError(k + 1, "risk budget violated at step " + std::to_string(k + 1) +
                                             " even with z = " + std::to_string(hi));
        }
        if (feasible(k, lo)) {
            hi = lo;
        } else {
            while (hi - lo > config.search.tol) {
                const double mid = 0.5 * (lo + hi);
                if (feasible(k, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        cv.z[k] = hi;
    }

    const RiskProfile achieved = evaluate(method, config, paths, cv);
    report.cv = cv;
    report.achieved_risk = achieved.risk;
    report.achieved_se = achieved.standard_error;
    return report;
}

RiskProfile adaptive_risk(Method method, const CriticalValues& cv, const CalibrationConfig& config,
                          std::uint64_t fresh_seed) {
    validate(config);
    const std::size_t expected = cv_length(method, config.grid.k_max);
    if (cv.z.size() != expected) {
        throw Error(Errc::LengthMismatch, "expected " + std::to_string(expected) +
                                              " critical values, got " + std::to_string(cv.z.size()));
    }
    const HomogeneousPaths paths = draw_paths(method, config, fresh_seed);
    return evaluate(method, config, paths, cv);
}

}  // namespace locpar
