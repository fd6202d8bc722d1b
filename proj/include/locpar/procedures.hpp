#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "locpar/family.hpp"
#include "locpar/interval_grid.hpp"

namespace locpar {

enum class Method { LMS, LCP, SA };

[[nodiscard]] std::string_view to_string(Method method) noexcept;
/// Accepts "lms", "ici", "lcp", "sa" (case-sensitive lower case).
[[nodiscard]] Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::LMS, Method::LCP, Method::SA};

/// Critical values z_1..z_K (K-1 for LCP). +inf never rejects, 0 rejects any positive statistic.
struct CriticalValues {
    std::vector<double> z;
    double r = 0.5;
    double alpha = 0.25;

    [[nodiscard]] static CriticalValues constant(std::size_t n, double value) {
        return {std::vector<double>(n, value), 0.5, 0.25};
    }
    [[nodiscard]] static CriticalValues never_reject(std::size_t n) {
        return constant(n, std::numeric_limits<double>::infinity());
    }
};

/// Number of critical values `method` consumes on a K-level grid.
[[nodiscard]] std::size_t cv_length(Method method, std::size_t k_max) noexcept;

struct StepEstimates {
    std::vector<double> estimates;     ///< theta_hat_k over I_k
    std::vector<std::size_t> lengths;  ///< N_k

    [[nodiscard]] std::size_t size() const noexcept { return estimates.size(); }
};

enum class StepDecision : std::uint8_t { Accepted, Rejected, NotTested };

/**
 * @brief Output of one adaptive procedure at one right edge.
 *
 * Layout of `statistics` / `decisions`:
 * - LMS: one entry per step k = 1..K; step 1 is always accepted with statistic 0.
 * - LCP: one entry per test k = 1..K-1; test k accepted means I_{k+1} is accepted.
 * - SA:  `statistics` holds m_k / z_k per step (0 for step 1), `decisions` is empty.
 *
 * `trajectory[m-1]` is the output of the same procedure restricted to the first m
 * intervals, which is what calibration compares against theta_hat_m.
 */
struct AdaptiveResult {
    std::size_t k_hat = 0;
    double theta_hat = 0.0;
    std::vector<double> statistics;
    std::vector<StepDecision> decisions;
    std::vector<double> gammas;  ///< SA only; gammas[0] == 1 for the seed step.
    std::vector<double> trajectory;
    /// LCP only: split point (time index) maximizing the rejected test.
    std::optional<std::size_t> change_point;
    /// k_hat for LMS/LCP; for SA the last step before the first gamma_k == 0.
    std::size_t k_effective = 0;
};

/// Piecewise-linear aggregation kernel: 1 below b, linear down to 0 at 1.
struct AggregationKernel {
    double b = 0.3;

    [[nodiscard]] double operator()(double x) const noexcept {
        if (x <= b) return 1.0;
        if (x >= 1.0) return 0.0;
        return (1.0 - x) / (1.0 - b);
    }
};

/// Validates 0 <= b < 1.
void validate(const AggregationKernel& kernel);

/// Natural aggregation scale: identity, 1/theta, log theta, logit theta.
[[nodiscard]] double nat(const Family& family, double theta);
[[nodiscard]] double nat_inv(const Family& family, double v);

/// `data` holds the whole series; time index s lives at data[s - 1].
[[nodiscard]] StepEstimates step_estimates(const Family& family, std::span<const double> data,
                                           const IntervalGrid& grid);

[[nodiscard]] AdaptiveResult lms_select(const Family& family, const StepEstimates& steps,
                                        const CriticalValues& cv);

/// LCP test statistics T_1..T_{K-1}; independent of the critical values.
struct LcpStatistics {
    std::vector<double> values;
    std::vector<std::size_t> argmax;  ///< smallest maximizing split point per test
};

[[nodiscard]] LcpStatistics lcp_statistics(const Family& family, std::span<const double> data,
                                           const IntervalGrid& grid);
[[nodiscard]] AdaptiveResult lcp_select(const StepEstimates& steps, const LcpStatistics& stats,
                                        const CriticalValues& cv);
[[nodiscard]] AdaptiveResult lcp_run(const Family& family, std::span<const double> data,
                                     const IntervalGrid& grid, const CriticalValues& cv);

[[nodiscard]] AdaptiveResult sa_run(const Family& family, const StepEstimates& steps,
                                    const CriticalValues& cv,
                                    const AggregationKernel& kernel = {});

/// Dispatches to the procedure for `method` on the series `data` at grid.right_edge().
[[nodiscard]] AdaptiveResult run_method(Method method, const Family& family,
                                        std::span<const double> data, const IntervalGrid& grid,
                                        const CriticalValues& cv,
                                        const AggregationKernel& kernel = {});

}  // namespace locpar
