#include "locpar/procedures.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "locpar/error.hpp"

namespace locpar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// stat / z with the sentinel conventions z = inf -> 0 and z = 0 -> inf (or 0 for stat 0).
double gated_ratio(double stat, double z) noexcept {
    if (std::isinf(z)) return 0.0;
    if (z == 0.0) return stat > 0.0 ? kInf : 0.0;
    return stat / z;
}

void check_cv(const CriticalValues& cv, std::size_t expected, std::string_view method) {
    if (cv.z.size() != expected) {
        throw Error(Errc::LengthMismatch, std::string(method) + " expects " +
                                              std::to_string(expected) + " critical values, got " +
                                              std::to_string(cv.z.size()));
    }
    for (double z : cv.z) {
        if (std::isnan(z) || z < 0.0) {
            throw Error(Errc::InvalidArgument, "critical values must be nonnegative");
        }
    }
}

void check_fits(std::span<const double> data, const IntervalGrid& grid) {
    if (grid.right_edge() > data.size()) {
        throw Error(Errc::GridTooLong, "grid right edge " + std::to_string(grid.right_edge()) +
                                           " beyond series of length " + std::to_string(data.size()));
    }
}

std::span<const double> window_of(std::span<const double> data, const Interval& iv) {
    return data.subspan(iv.start - 1, iv.length());
}

double logistic(double v) noexcept {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::LMS: return "lms";
        case Method::LCP: return "lcp";
        case Method::SA: return "sa";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "lms" || name == "ici") return Method::LMS;
    if (name == "lcp") return Method::LCP;
    if (name == "sa") return Method::SA;
    throw Error(Errc::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::size_t cv_length(Method method, std::size_t k_max) noexcept {
    if (method == Method::LCP) return k_max == 0 ? 0 : k_max - 1;
    return k_max;
}

void validate(const AggregationKernel& kernel) {
    if (!(kernel.b >= 0.0 && kernel.b < 1.0)) {
        throw Error(Errc::InvalidArgument, "aggregation kernel knee must lie in [0, 1)");
    }
}

double nat(const Family& family, double theta) {
    require_domain(family, theta);
    switch (family.kind) {
        case FamilyKind::Gaussian: return theta;
        case FamilyKind::Volatility:
        case FamilyKind::Exponential: return 1.0 / theta;
        case FamilyKind::Poisson: return std::log(theta);
        case FamilyKind::Bernoulli: return std::log(theta) - std::log1p(-theta);
    }
    return theta;
}

double nat_inv(const Family& family, double v) {
    if (!std::isfinite(v)) throw Error(Errc::DomainViolation, "natural parameter is not finite");
    double theta = v;
    switch (family.kind) {
        case FamilyKind::Gaussian: break;
        case FamilyKind::Volatility:
        case FamilyKind::Exponential:
            if (!(v > 0.0)) throw Error(Errc::DomainViolation, "inverse scale must be positive");
            theta = 1.0 / v;
            break;
        case FamilyKind::Poisson: theta = std::exp(v); break;
        case FamilyKind::Bernoulli: theta = logistic(v); break;
    }
    require_domain(family, theta);
    return theta;
}

StepEstimates step_estimates(const Family& family, std::span<const double> data,
                             const IntervalGrid& grid) {
    check_fits(data, grid);
    StepEstimates steps;
    steps.lengths = grid.lengths();
    steps.estimates.reserve(grid.k_max());
    for (std::size_t k = 1; k <= grid.k_max(); ++k) {
        steps.estimates.push_back(mle(family, window_of(data, grid.interval(k))));
    }
    return steps;
}

AdaptiveResult lms_select(const Family& family, const StepEstimates& steps,
                          const CriticalValues& cv) {
    const std::size_t K = steps.size();
    if (K == 0) throw Error(Errc::GridTooSmall, "no step estimates");
    check_cv(cv, K, "lms");

    AdaptiveResult out;
    out.statistics.assign(K, 0.0);
    out.decisions.assign(K, StepDecision::NotTested);
    out.decisions[0] = StepDecision::Accepted;
    out.k_hat = 1;
    bool stopped = false;
    for (std::size_t k = 2; k <= K; ++k) {
        const double candidate = steps.estimates[k - 1];
        double worst = 0.0;
        bool ok = true;
        for (std::size_t m = 1; m < k; ++m) {
            const double stat =
                static_cast<double>(steps.lengths[m - 1]) * kl(family, steps.estimates[m - 1], candidate);
            worst = std::max(worst, gated_ratio(stat, cv.z[m - 1]));
            ok = ok && stat <= cv.z[m - 1];
        }
        out.statistics[k - 1] = worst;
        if (stopped) continue;
        if (ok) {
            out.decisions[k - 1] = StepDecision::Accepted;
            out.k_hat = k;
        } else {
            out.decisions[k - 1] = StepDecision::Rejected;
            stopped = true;
        }
    }
    out.theta_hat = steps.estimates[out.k_hat - 1];
    out.k_effective = out.k_hat;
    out.trajectory.resize(K);
    for (std::size_t m = 1; m <= K; ++m) out.trajectory[m - 1] = steps.estimates[std::min(m, out.k_hat) - 1];
    return out;
}

LcpStatistics lcp_statistics(const Family& family, std::span<const double> data,
                             const IntervalGrid& grid) {
    check_fits(data, grid);
    const std::size_t K = grid.k_max();
    if (K < 2) throw Error(Errc::GridTooSmall, "LCP needs at least two intervals");
    require_support(family, window_of(data, grid.interval(K)));

    LcpStatistics stats;
    stats.values.reserve(K - 1);
    stats.argmax.reserve(K - 1);
    const std::size_t t = grid.right_edge();
    for (std::size_t k = 1; k < K; ++k) {
        const Interval testing = grid.interval(k + 1);
        const auto window = window_of(data, testing);
        const double total = std::accumulate(window.begin(), window.end(), 0.0);
        const double n_total = static_cast<double>(window.size());
        const double theta_full = clamp_to_domain(family, total / n_total);

        const TestedSet tested = grid.tested_set(k);
        double left_sum = 0.0;
        std::size_t next = testing.start;
        double best = -kInf;
        std::size_t best_tau = tested.first;
        for (std::size_t tau = tested.first; tau <= tested.last; ++tau) {
            for (; next <= tau; ++next) left_sum += data[next - 1];
            const std::size_t n_left = tau - testing.start + 1;
            const std::size_t n_right = t - tau;
            const double right_sum = total - left_sum;
            const double value =
                fitted_lr_from_mean(family, n_left, left_sum / static_cast<double>(n_left), theta_full) +
                fitted_lr_from_mean(family, n_right, right_sum / static_cast<double>(n_right), theta_full);
            if (value > best) {
                best = value;
                best_tau = tau;
            }
        }
        stats.values.push_back(best);
        stats.argmax.push_back(best_tau);
    }
    return stats;
}

AdaptiveResult lcp_select(const StepEstimates& steps, const LcpStatistics& stats,
                          const CriticalValues& cv) {
    const std::size_t K = steps.size();
    if (K < 2) throw Error(Errc::GridTooSmall, "LCP needs at least two intervals");
    if (stats.values.size() != K - 1) {
        throw Error(Errc::LengthMismatch, "LCP statistics do not match the step estimates");
    }
    check_cv(cv, K - 1, "lcp");

    AdaptiveResult out;
    out.statistics = stats.values;
    out.decisions.assign(K - 1, StepDecision::NotTested);
    out.k_hat = K;
    for (std::size_t k = 1; k < K; ++k) {
        if (stats.values[k - 1] > cv.z[k - 1]) {
            out.decisions[k - 1] = StepDecision::Rejected;
            out.k_hat = k;
            out.change_point = stats.argmax[k - 1];
            break;
        }
        out.decisions[k - 1] = StepDecision::Accepted;
    }
    out.theta_hat = steps.estimates[out.k_hat - 1];
    out.k_effective = out.k_hat;
    out.trajectory.resize(K);
    for (std::size_t m = 1; m <= K; ++m) out.trajectory[m - 1] = steps.estimates[std::min(m, out.k_hat) - 1];
    return out;
}

AdaptiveResult lcp_run(const Family& family, std::span<const double> data, const IntervalGrid& grid,
                       const CriticalValues& cv) {
    if (grid.k_max() < 2) throw Error(Errc::GridTooSmall, "LCP needs at least two intervals");
    check_cv(cv, grid.k_max() - 1, "lcp");
    return lcp_select(step_estimates(family, data, grid), lcp_statistics(family, data, grid), cv);
}

AdaptiveResult sa_run(const Family& family, const StepEstimates& steps, const CriticalValues& cv,
                      const AggregationKernel& kernel) {
    const std::size_t K = steps.size();
    if (K == 0) throw Error(Errc::GridTooSmall, "no step estimates");
    check_cv(cv, K, "sa");
    validate(kernel);

    AdaptiveResult out;
    out.statistics.assign(K, 0.0);
    out.gammas.assign(K, 1.0);
    out.trajectory.resize(K);
    out.k_effective = K;

    double theta = steps.estimates[0];
    double v = nat(family, theta);
    out.trajectory[0] = theta;
    for (std::size_t k = 2; k <= K; ++k) {
        const double estimate = steps.estimates[k - 1];
        const double divergence = static_cast<double>(steps.lengths[k - 1]) * kl(family, estimate, theta);
        const double x = gated_ratio(divergence, cv.z[k - 1]);
        const double gamma = kernel(x);
        out.statistics[k - 1] = x;
        out.gammas[k - 1] = gamma;
        // exact plateaus keep theta bit-identical to a step estimate
        if (gamma == 1.0) {
            theta = estimate;
            v = nat(family, theta);
        } else if (gamma > 0.0) {
            v = gamma * nat(family, estimate) + (1.0 - gamma) * v;
            theta = nat_inv(family, v);
        } else if (out.k_effective == K) {
            out.k_effective = k - 1;
        }
        out.trajectory[k - 1] = theta;
    }
    out.k_hat = K;
    out.theta_hat = theta;
    return out;
}

AdaptiveResult run_method(Method method, const Family& family, std::span<const double> data,
                          const IntervalGrid& grid, const CriticalValues& cv,
                          const AggregationKernel& kernel) {
    switch (method) {
        case Method::LMS: return lms_select(family, step_estimates(family, data, grid), cv);
        case Method::LCP: return lcp_run(family, data, grid, cv);
        case Method::SA: return sa_run(family, step_estimates(family, data, grid), cv, kernel);
    }
    throw Error(Errc::InvalidArgument, "unknown method");
}

}  // namespace locpar
