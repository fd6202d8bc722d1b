#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locpar/calibration.hpp"
#include "locpar/family.hpp"
#include "locpar/interval_grid.hpp"
#include "locpar/procedures.hpp"

namespace locpar {

struct Segment {
    std::size_t length = 1;
    double theta = 0.0;
};

/// Piecewise-constant truth path plus the Monte Carlo design around it.
struct Scenario {
    std::string id;
    Family family;
    std::vector<Segment> segments;
    std::size_t m_reps = 200;
    std::vector<std::size_t> eval_points;  ///< 1-based time indices
    std::uint64_t seed = 1;

    [[nodiscard]] std::size_t length() const noexcept;
    /// theta_true(s) for s = 1..length(), stored at index s - 1.
    [[nodiscard]] std::vector<double> theta_path() const;
    /// First time index of every segment after the first.
    [[nodiscard]] std::vector<std::size_t> jump_times() const;
    /// K(theta_before, theta_after) of jump `j` (0-based).
    [[nodiscard]] double contrast(std::size_t j) const;
};

/// Throws InvalidArgument / DomainViolation if the scenario cannot run on `grid`.
void validate(const Scenario& scenario, const GridSpec& grid);

/// Draws one replication of the scenario's series.
[[nodiscard]] std::vector<double> draw_series(const Scenario& scenario, Rng& rng);

struct MethodCvs {
    CriticalValues lms;
    CriticalValues lcp;
    CriticalValues sa;

    [[nodiscard]] const CriticalValues& operator[](Method method) const noexcept {
        switch (method) {
            case Method::LMS: return lms;
            case Method::LCP: return lcp;
            case Method::SA: return sa;
        }
        return lms;
    }
};

struct PointMetrics {
    std::size_t eval_point = 0;
    double theta_true = 0.0;
    double mean_abs_error = 0.0;
    double mean_kl = 0.0;  ///< mean K(theta_true, theta_hat)
    double kl_standard_error = 0.0;
    double mean_k_hat = 0.0;
    double mean_k_effective = 0.0;
};

/// Delay of the first contraction of the selected window below its level just before the jump.
///
/// Replications already at level 1 just before the jump cannot contract further; they
/// are counted in `undefined` and left out of `delays`.
struct JumpDelay {
    std::size_t jump_time = 0;
    std::size_t horizon = 0;     ///< undetected replications are censored at this value
    std::vector<double> delays;  ///< one per eligible replication, t_detect - jump_time
    std::size_t detected = 0;
    std::size_t undefined = 0;

    [[nodiscard]] double mean() const noexcept;
    [[nodiscard]] double detect_fraction() const noexcept;
};

struct MethodReport {
    std::string name;
    std::vector<PointMetrics> points;
    std::vector<JumpDelay> delays;  ///< empty for the oracle
};

struct ScenarioReport {
    Scenario scenario;
    GridSpec grid;
    AggregationKernel kernel;
    std::vector<MethodReport> methods;  ///< LMS, LCP, SA in that order
    MethodReport oracle;
    std::vector<std::size_t> oracle_index;  ///< per eval point

    [[nodiscard]] const MethodReport& method(Method m) const;
};

/**
 * @brief Best grid index given the truth: argmin_k mean_{s in I_k} K(theta(s), theta_bar_k) + 1/N_k.
 *
 * theta_bar_k is the mean of the true path over I_k; ties go to the larger k.
 */
[[nodiscard]] std::size_t oracle_index(const Family& family, std::span<const double> theta_path,
                                       const IntervalGrid& grid);

/// Homogeneous calibration at the first segment's parameter, seeded from the scenario seed.
[[nodiscard]] CalibrationConfig scenario_calibration(const Scenario& scenario, Method method,
                                                     const GridSpec& grid, std::size_t m_reps = 5000,
                                                     const AggregationKernel& kernel = {},
                                                     std::size_t threads = 1);

[[nodiscard]] ScenarioReport run_scenario(const Scenario& scenario, const GridSpec& grid,
                                          const MethodCvs& cvs, const AggregationKernel& kernel = {},
                                          std::size_t threads = 1);

/// Grid used by the bundled scenarios.
[[nodiscard]] GridSpec bundled_grid();

/// Contrast levels of the bundled ladder, weakest first.
enum class Contrast { Weak, Moderate, Large };

/// Two-segment jump scenario for `kind` at the given contrast.
[[nodiscard]] Scenario jump_scenario(FamilyKind kind, Contrast contrast);
[[nodiscard]] Scenario homogeneous_scenario(FamilyKind kind);
/// Weak, moderate and large jumps with a shared seed (paired comparison).
[[nodiscard]] std::vector<Scenario> contrast_ladder(FamilyKind kind);
/// Homogeneous, moderate and large scenarios for each of the five families.
[[nodiscard]] std::vector<Scenario> bundled_scenarios();
/// Accepts ids like "gaussian-homogeneous", "poisson-large", "bernoulli-weak".
[[nodiscard]] Scenario bundled_scenario(std::string_view id);

}  // namespace locpar
