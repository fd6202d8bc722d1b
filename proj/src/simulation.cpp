#include "locpar/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "locpar/error.hpp"

namespace locpar {

std::size_t Scenario::length() const noexcept {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
}

std::vector<double> Scenario::theta_path() const {
    std::vector<double> path;
    path.reserve(length());
    for (const auto& s : segments) path.insert(path.end(), s.length, s.theta);
    return path;
}

std::vector<std::size_t> Scenario::jump_times() const {
    std::vector<std::size_t> jumps;
    std::size_t start = 1;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i > 0) jumps.push_back(start);
        start += segments[i].length;
    }
    return jumps;
}

double Scenario::contrast(std::size_t j) const {
    if (j + 1 >= segments.size()) throw Error(Errc::IndexOutOfRange, "no such jump");
    return kl(family, segments[j].theta, segments[j + 1].theta);
}

void validate(const Scenario& scenario, const GridSpec& grid) {
    validate(scenario.family);
    if (scenario.segments.empty()) throw Error(Errc::InvalidArgument, "scenario has no segments");
    for (const auto& s : scenario.segments) {
        if (s.length < 1) throw Error(Errc::InvalidArgument, "segment lengths must be at least 1");
        require_domain(scenario.family, s.theta);
    }
    if (scenario.m_reps < 1) throw Error(Errc::InvalidArgument, "scenario needs at least one replication");
    const std::size_t n = scenario.length();
    const std::size_t largest = grid.largest();
    for (std::size_t t : scenario.eval_points) {
        if (t > n) throw Error(Errc::InvalidArgument, "eval point " + std::to_string(t) + " beyond the series");
        if (t < largest) {
            throw Error(Errc::GridTooLong, "eval point " + std::to_string(t) +
                                               " precedes the largest interval length " +
                                               std::to_string(largest));
        }
    }
    for (std::size_t j : scenario.jump_times()) {
        if (j - 1 < largest) {
            throw Error(Errc::GridTooLong, "jump at " + std::to_string(j) +
                                               " leaves too little pre-jump history for the grid");
        }
    }
}

std::vector<double> draw_series(const Scenario& scenario, Rng& rng) {
    std::vector<double> series;
    series.reserve(scenario.length());
    for (const auto& s : scenario.segments) sample_into(scenario.family, s.theta, s.length, rng, series);
    return series;
}

double JumpDelay::mean() const noexcept {
    if (delays.empty()) return 0.0;
    return std::accumulate(delays.begin(), delays.end(), 0.0) / static_cast<double>(delays.size());
}

double JumpDelay::detect_fraction() const noexcept {
    if (delays.empty()) return 0.0;
    return static_cast<double>(detected) / static_cast<double>(delays.size());
}

const MethodReport& ScenarioReport::method(Method m) const {
    const auto idx = static_cast<std::size_t>(m);
    if (idx >= methods.size()) throw Error(Errc::IndexOutOfRange, "method not in report");
    return methods[idx];
}

std::size_t oracle_index(const Family& family, std::span<const double> theta_path,
                         const IntervalGrid& grid) {
    if (grid.right_edge() > theta_path.size()) {
        throw Error(Errc::GridTooLong, "grid right edge beyond the parameter path");
    }
    std::size_t best_k = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= grid.k_max(); ++k) {
        const Interval iv = grid.interval(k);
        const auto window = theta_path.subspan(iv.start - 1, iv.length());
        const double n = static_cast<double>(window.size());
        const double bar = std::accumulate(window.begin(), window.end(), 0.0) / n;
        double bias = 0.0;
        for (double theta : window) bias += kl(family, theta, bar);
        const double criterion = bias / n + 1.0 / n;
        if (criterion <= best) {
            best = criterion;
            best_k = k;
        }
    }
    return best_k;
}

namespace {

constexpr std::size_t kMethods = 3;

struct Outcome {
    std::array<double, kMethods> theta{};
    std::array<std::size_t, kMethods> k_hat{};
    std::array<std::size_t, kMethods> k_eff{};
    double oracle_theta = 0.0;
};

struct PointSample {
    std::array<double, kMethods + 1> abs_error{};
    std::array<double, kMethods + 1> kl{};
    std::array<double, kMethods + 1> k_hat{};
    std::array<double, kMethods + 1> k_eff{};
};

struct ReplicationResult {
    std::vector<PointSample> points;
    // delays[jump][method], censored at the horizon; NaN when the pre-jump level is 1
    std::vector<std::array<double, kMethods>> delays;
    std::vector<std::array<bool, kMethods>> detected;
};

}  // namespace

ScenarioReport run_scenario(const Scenario& scenario, const GridSpec& grid, const MethodCvs& cvs,
                            const AggregationKernel& kernel, std::size_t threads) {
    validate(scenario, grid);
    validate(kernel);
    const std::size_t K = grid.k_max;
    for (Method m : kAllMethods) {
        if (cvs[m].z.size() != cv_length(m, K)) {
            throw Error(Errc::LengthMismatch, std::string(to_string(m)) +
                                                  " critical values do not match the grid");
        }
    }
    if (K < 2) throw Error(Errc::GridTooSmall, "scenario runs need K >= 2 for LCP");

    const std::size_t n = scenario.length();
    const auto truth = scenario.theta_path();
    const auto jumps = scenario.jump_times();
    std::vector<std::size_t> jump_horizon;
    for (std::size_t j = 0; j < jumps.size(); ++j) {
        const std::size_t end = j + 1 < jumps.size() ? jumps[j + 1] : n + 1;
        jump_horizon.push_back(end - jumps[j]);
    }

    std::vector<std::size_t> oracle_k;
    for (std::size_t t : scenario.eval_points) oracle_k.push_back(oracle_index(scenario.family, truth, grid.at(t)));

    std::vector<ReplicationResult> reps(scenario.m_reps);
    parallel_for(scenario.m_reps, threads, [&](std::size_t rep) {
        Rng rng(replication_seed(scenario.seed, rep));
        const auto series = draw_series(scenario, rng);
        std::vector<std::optional<Outcome>> cache(n + 1);

        auto outcome_at = [&](std::size_t t) -> const Outcome& {
            if (!cache[t]) {
                const IntervalGrid g = grid.at(t);
                const StepEstimates steps = step_estimates(scenario.family, series, g);
                const std::array<AdaptiveResult, kMethods> results = {
                    lms_select(scenario.family, steps, cvs.lms),
                    lcp_select(steps, lcp_statistics(scenario.family, series, g), cvs.lcp),
                    sa_run(scenario.family, steps, cvs.sa, kernel)};
                Outcome o;
                for (std::size_t m = 0; m < kMethods; ++m) {
                    o.theta[m] = results[m].theta_hat;
                    o.k_hat[m] = results[m].k_hat;
                    o.k_eff[m] = results[m].k_effective;
                }
                cache[t] = o;
            }
            return *cache[t];
        };

        ReplicationResult& out = reps[rep];
        out.points.resize(scenario.eval_points.size());
        for (std::size_t e = 0; e < scenario.eval_points.size(); ++e) {
            const std::size_t t = scenario.eval_points[e];
            const Outcome& o = outcome_at(t);
            const double truth_t = truth[t - 1];
            const Interval oracle_iv = grid.at(t).interval(oracle_k[e]);
            const double oracle_theta =
                mle(scenario.family, std::span<const double>(series).subspan(oracle_iv.start - 1, oracle_iv.length()));
            PointSample& p = out.points[e];
            for (std::size_t m = 0; m <= kMethods; ++m) {
                const double est = m < kMethods ? o.theta[m] : oracle_theta;
                p.abs_error[m] = std::abs(est - truth_t);
                p.kl[m] = kl(scenario.family, truth_t, est);
                p.k_hat[m] = static_cast<double>(m < kMethods ? o.k_hat[m] : oracle_k[e]);
                p.k_eff[m] = static_cast<double>(m < kMethods ? o.k_eff[m] : oracle_k[e]);
            }
        }

        out.delays.resize(jumps.size());
        out.detected.resize(jumps.size());
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            const std::size_t jt = jumps[j];
            const std::size_t horizon = jump_horizon[j];
            const std::array<std::size_t, kMethods> before = outcome_at(jt - 1).k_eff;
            std::size_t pending = kMethods;
            for (std::size_t m = 0; m < kMethods; ++m) {
                out.detected[j][m] = false;
                if (before[m] > 1) {
                    out.delays[j][m] = static_cast<double>(horizon);
                } else {
                    out.delays[j][m] = std::numeric_limits<double>::quiet_NaN();
                    --pending;
                }
            }
            for (std::size_t t = jt; t < jt + horizon && pending > 0; ++t) {
                const Outcome& o = outcome_at(t);
                for (std::size_t m = 0; m < kMethods; ++m) {
                    if (!out.detected[j][m] && !std::isnan(out.delays[j][m]) && o.k_eff[m] < before[m]) {
                        out.detected[j][m] = true;
                        out.delays[j][m] = static_cast<double>(t - jt);
                        --pending;
                    }
                }
            }
        }
    });

    ScenarioReport report;
    report.scenario = scenario;
    report.grid = grid;
    report.kernel = kernel;
    report.oracle_index = oracle_k;
    report.methods.resize(kMethods);
    for (std::size_t m = 0; m < kMethods; ++m) report.methods[m].name = to_string(kAllMethods[m]);
    report.oracle.name = "oracle";

    const double M = static_cast<double>(scenario.m_reps);
    for (std::size_t m = 0; m <= kMethods; ++m) {
        MethodReport& target = m < kMethods ? report.methods[m] : report.oracle;
        for (std::size_t e = 0; e < scenario.eval_points.size(); ++e) {
            PointMetrics pm;
            pm.eval_point = scenario.eval_points[e];
            pm.theta_true = truth[pm.eval_point - 1];
            double abs_sum = 0.0, kl_sum = 0.0, k_sum = 0.0, keff_sum = 0.0;
            for (const auto& r : reps) {
                abs_sum += r.points[e].abs_error[m];
                kl_sum += r.points[e].kl[m];
                k_sum += r.points[e].k_hat[m];
                keff_sum += r.points[e].k_eff[m];
            }
            pm.mean_abs_error = abs_sum / M;
            pm.mean_kl = kl_sum / M;
            pm.mean_k_hat = k_sum / M;
            pm.mean_k_effective = keff_sum / M;
            double ss = 0.0;
            for (const auto& r : reps) {
                const double d = r.points[e].kl[m] - pm.mean_kl;
                ss += d * d;
            }
            pm.kl_standard_error = M > 1 ? std::sqrt(ss / (M - 1.0) / M) : 0.0;
            target.points.push_back(pm);
        }
        if (m == kMethods) continue;
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            JumpDelay d;
            d.jump_time = jumps[j];
            d.horizon = jump_horizon[j];
            d.delays.reserve(reps.size());
            for (const auto& r : reps) {
                if (std::isnan(r.delays[j][m])) {
                    ++d.undefined;
                    continue;
                }
                d.delays.push_back(r.delays[j][m]);
                if (r.detected[j][m]) ++d.detected;
            }
            target.delays.push_back(std::move(d));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Bundled scenarios
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kSegment = 250;

struct LadderSpec {
    FamilyKind kind;
    double before;
    std::array<double, 3> after;  // weak, moderate, large
    std::uint64_t seed;
};

// Jump sizes target K(before, after) of roughly 0.1 / 1 / 4 per observation. Scale
// families jump down, where the same contrast needs a smaller ratio. Bernoulli tops out
// at 0.75: beyond that the clamp dominates the oracle risk of the smallest window.
// clang-format off
constexpr std::array<LadderSpec, 5> kLadders = {{
    {FamilyKind::Gaussian,    0.0, {0.447, 1.414, 2.828}, 1001},
    {FamilyKind::Volatility,  1.0, {0.565, 0.222, 0.0875}, 1002},
    {FamilyKind::Poisson,     3.0, {3.84, 6.16, 10.85},   1003},
    {FamilyKind::Exponential, 1.0, {0.66, 0.318, 0.144},  1004},
    {FamilyKind::Bernoulli,   0.5, {0.6, 0.7, 0.75},      1005},
}};
// clang-format on

const LadderSpec& ladder_for(FamilyKind kind) {
    for (const auto& l : kLadders) {
        if (l.kind == kind) return l;
    }
    throw Error(Errc::InvalidArgument, "no bundled ladder for family");
}

std::string_view contrast_name(Contrast c) {
    switch (c) {
        case Contrast::Weak: return "weak";
        case Contrast::Moderate: return "moderate";
        case Contrast::Large: return "large";
    }
    return "unknown";
}

Scenario base_scenario(const LadderSpec& spec) {
    Scenario s;
    s.family = Family{spec.kind, 1.0};
    s.m_reps = 200;
    s.seed = spec.seed;
    for (std::size_t t = kSegment + 10; t <= 2 * kSegment; t += 10) s.eval_points.push_back(t);
    return s;
}

}  // namespace

CalibrationConfig scenario_calibration(const Scenario& scenario, Method method, const GridSpec& grid,
                                       std::size_t m_reps, const AggregationKernel& kernel,
                                       std::size_t threads) {
    CalibrationConfig config;
    config.family = scenario.family;
    config.theta_star = scenario.segments.front().theta;
    config.grid = grid;
    config.m_reps = m_reps;
    config.kernel = kernel;
    config.seed = mix_seed(scenario.seed ^ (static_cast<std::uint64_t>(method) + 1));
    config.threads = threads;
    return config;
}

// Smallest window of 30 keeps the boundary clamp (and the KL blow-up it causes) a
// rare event for every bundled family.
GridSpec bundled_grid() { return GridSpec{30, kDefaultRatio, 6}; }

Scenario jump_scenario(FamilyKind kind, Contrast contrast) {
    const LadderSpec& spec = ladder_for(kind);
    Scenario s = base_scenario(spec);
    s.id = std::string(to_string(kind)) + "-" + std::string(contrast_name(contrast));
    if (kind == FamilyKind::Bernoulli) {
        // symmetric around 1/2 so the contrast grows on both sides of the jump
        const double hi = spec.after[static_cast<std::size_t>(contrast)];
        s.segments = {{kSegment, 1.0 - hi}, {kSegment, hi}};
    } else {
        s.segments = {{kSegment, spec.before}, {kSegment, spec.after[static_cast<std::size_t>(contrast)]}};
    }
    return s;
}

Scenario homogeneous_scenario(FamilyKind kind) {
    const LadderSpec& spec = ladder_for(kind);
    Scenario s = base_scenario(spec);
    s.id = std::string(to_string(kind)) + "-homogeneous";
    s.segments = {{2 * kSegment, spec.before}};
    return s;
}

std::vector<Scenario> contrast_ladder(FamilyKind kind) {
    return {jump_scenario(kind, Contrast::Weak), jump_scenario(kind, Contrast::Moderate),
            jump_scenario(kind, Contrast::Large)};
}

std::vector<Scenario> bundled_scenarios() {
    std::vector<Scenario> all;
    for (const auto& spec : kLadders) {
        all.push_back(homogeneous_scenario(spec.kind));
        all.push_back(jump_scenario(spec.kind, Contrast::Moderate));
        all.push_back(jump_scenario(spec.kind, Contrast::Large));
    }
    return all;
}

Scenario bundled_scenario(std::string_view id) {
    for (const auto& spec : kLadders) {
        const std::string prefix = std::string(to_string(spec.kind)) + "-";
        if (id.substr(0, prefix.size()) != prefix) continue;
        const auto rest = id.substr(prefix.size());
        if (rest == "homogeneous") return homogeneous_scenario(spec.kind);
        for (Contrast c : {Contrast::Weak, Contrast::Moderate, Contrast::Large}) {
            if (rest == contrast_name(c)) return jump_scenario(spec.kind, c);
        }
    }
    throw Error(Errc::InvalidArgument, "unknown scenario id '" + std::string(id) + "'");
}

}  // namespace locpar
