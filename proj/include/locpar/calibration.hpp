#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "locpar/family.hpp"
#include "locpar/interval_grid.hpp"
#include "locpar/procedures.hpp"

namespace locpar {

struct SearchConfig {
    double z_max = 50.0;
    double tol = 1e-3;
};

/// Monte Carlo calibration of critical values under the homogeneous model p_{theta_star}.
struct CalibrationConfig {
    Family family = Family::gaussian();
    double theta_star = 0.0;
    GridSpec grid;
    double r = 0.5;
    double alpha = 0.25;
    std::size_t m_reps = 5000;
    SearchConfig search;
    std::uint64_t seed = 1;
    AggregationKernel kernel;  ///< used by SA only
    std::size_t threads = 1;   ///< does not affect results
};

/// Throws InvalidArgument / DomainViolation / BadRatio on an unusable configuration.
void validate(const CalibrationConfig& config);

/// Per-step Monte Carlo risk E|N_m K(theta_hat_m, theta_adaptive^(m))|^r, m = 1..K.
struct RiskProfile {
    std::vector<double> risk;
    std::vector<double> standard_error;
};

struct CalibrationReport {
    Method method = Method::LMS;
    CalibrationConfig config;
    CriticalValues cv;
    std::vector<double> achieved_risk;
    std::vector<double> achieved_se;
    std::vector<double> budget;  ///< alpha * m * r_r / K
    double r_r = 0.0;
    double r_r_se = 0.0;
};

/**
 * @brief Sequentially chooses z_1, z_2, ... by bisection on common random paths.
 *
 * With z_1..z_{k-1} frozen and z_{k+1..} = inf, z_k is the smallest value in
 * [0, z_max] (to within tol) for which the risk at every step m = 1..K stays within
 * alpha * m * r_r / K, where r_r is the parametric risk bound at the largest window.
 *
 * @throws InfeasibleError when the budget cannot be met even at z_max.
 */
[[nodiscard]] CalibrationReport calibrate(Method method, const CalibrationConfig& config);

/// Same functional as calibrate() uses, evaluated on paths drawn from `fresh_seed`.
[[nodiscard]] RiskProfile adaptive_risk(Method method, const CriticalValues& cv,
                                        const CalibrationConfig& config, std::uint64_t fresh_seed);

/// Propagation budget alpha * m * r_r / K for m = 1..K.
[[nodiscard]] std::vector<double> risk_budget(double alpha, double r_r, std::size_t k_max);

}  // namespace locpar
