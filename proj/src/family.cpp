#include "locpar/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "locpar/error.hpp"

namespace locpar {

namespace {

std::string describe(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

std::string_view to_string(FamilyKind kind) noexcept {
    switch (kind) {
        case FamilyKind::Gaussian: return "gaussian";
        case FamilyKind::Volatility: return "volatility";
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::Exponential: return "exponential";
        case FamilyKind::Bernoulli: return "bernoulli";
    }
    return "unknown";
}

FamilyKind parse_family_kind(std::string_view name) {
    for (auto kind : {FamilyKind::Gaussian, FamilyKind::Volatility, FamilyKind::Poisson,
                      FamilyKind::Exponential, FamilyKind::Bernoulli}) {
        if (name == to_string(kind)) return kind;
    }
    throw Error(Errc::InvalidArgument, "unknown family '" + std::string(name) + "'");
}

void validate(const Family& family) {
    if (family.kind == FamilyKind::Gaussian &&
        !(family.gaussian_sigma > 0.0 && std::isfinite(family.gaussian_sigma))) {
        throw Error(Errc::DomainViolation,
                    "gaussian sigma must be positive, got " + describe(family.gaussian_sigma));
    }
}

bool in_domain(const Family& family, double theta) noexcept {
    if (!std::isfinite(theta)) return false;
    switch (family.kind) {
        case FamilyKind::Gaussian: return true;
        case FamilyKind::Volatility:
        case FamilyKind::Poisson:
        case FamilyKind::Exponential: return theta > 0.0;
        case FamilyKind::Bernoulli: return theta > 0.0 && theta < 1.0;
    }
    return false;
}

bool in_support(const Family& family, double y) noexcept {
    if (!std::isfinite(y)) return false;
    switch (family.kind) {
        case FamilyKind::Gaussian: return true;
        case FamilyKind::Volatility:
        case FamilyKind::Exponential: return y >= 0.0;
        case FamilyKind::Poisson: return y >= 0.0 && std::floor(y) == y;
        case FamilyKind::Bernoulli: return y == 0.0 || y == 1.0;
    }
    return false;
}

void require_domain(const Family& family, double theta) {
    if (!in_domain(family, theta)) {
        throw Error(Errc::DomainViolation, "parameter " + describe(theta) + " outside the " +
                                               std::string(to_string(family.kind)) + " domain");
    }
}

void require_support(const Family& family, std::span<const double> window) {
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (!in_support(family, window[i])) {
            throw Error(Errc::SupportViolation,
                        "observation " + std::to_string(i) + " = " + describe(window[i]) +
                            " outside the " + std::string(to_string(family.kind)) + " support");
        }
    }
}

double clamp_to_domain(const Family& family, double mean) noexcept {
    switch (family.kind) {
        case FamilyKind::Gaussian: return mean;
        case FamilyKind::Volatility:
        case FamilyKind::Poisson:
        case FamilyKind::Exponential: return std::max(mean, kClampEpsilon);
        case FamilyKind::Bernoulli: return std::clamp(mean, kClampEpsilon, 1.0 - kClampEpsilon);
    }
    return mean;
}

double mle(const Family& family, std::span<const double> window) {
    if (window.empty()) throw Error(Errc::EmptyWindow, "mle needs at least one observation");
    require_support(family, window);
    const double mean =
        std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    return clamp_to_domain(family, mean);
}

double kl(const Family& family, double theta_a, double theta_b) {
    validate(family);
    require_domain(family, theta_a);
    require_domain(family, theta_b);
    if (theta_a == theta_b) return 0.0;
    double value = 0.0;
    switch (family.kind) {
        case FamilyKind::Gaussian: {
            const double diff = (theta_a - theta_b) / family.gaussian_sigma;
            value = 0.5 * diff * diff;
            break;
        }
        case FamilyKind::Volatility:
        case FamilyKind::Exponential: {
            // x - 1 - ln x with x = a / b, written around x = 1 for accuracy
            const double d = (theta_a - theta_b) / theta_b;
            value = d - std::log1p(d);
            if (family.kind == FamilyKind::Volatility) value *= 0.5;
            break;
        }
        case FamilyKind::Poisson: {
            const double d = (theta_a - theta_b) / theta_b;
            value = theta_a * std::log1p(d) - (theta_a - theta_b);
            break;
        }
        case FamilyKind::Bernoulli:
            value = theta_a * std::log(theta_a / theta_b) +
                    (1.0 - theta_a) * std::log((1.0 - theta_a) / (1.0 - theta_b));
            break;
    }
    return std::max(value, 0.0);
}

double log_density(const Family& family, double theta, double y) {
    validate(family);
    require_domain(family, theta);
    if (!in_support(family, y)) {
        throw Error(Errc::SupportViolation, "observation " + describe(y) + " outside the " +
                                                std::string(to_string(family.kind)) + " support");
    }
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    switch (family.kind) {
        case FamilyKind::Gaussian: {
            const double s = family.gaussian_sigma;
            const double z = (y - theta) / s;
            return -0.5 * kLog2Pi - std::log(s) - 0.5 * z * z;
        }
        case FamilyKind::Volatility:
            if (y == 0.0) return std::numeric_limits<double>::infinity();
            return -0.5 * (kLog2Pi + std::log(theta) + std::log(y)) - y / (2.0 * theta);
        case FamilyKind::Poisson: return y * std::log(theta) - theta - std::lgamma(y + 1.0);
        case FamilyKind::Exponential: return -std::log(theta) - y / theta;
        case FamilyKind::Bernoulli: return y == 1.0 ? std::log(theta) : std::log1p(-theta);
    }
    return 0.0;
}

double canonical_parameter(const Family& family, double theta) {
    validate(family);
    require_domain(family, theta);
    switch (family.kind) {
        case FamilyKind::Gaussian:
            return theta / (family.gaussian_sigma * family.gaussian_sigma);
        case FamilyKind::Volatility: return -0.5 / theta;
        case FamilyKind::Poisson: return std::log(theta);
        case FamilyKind::Exponential: return -1.0 / theta;
        case FamilyKind::Bernoulli: return logit(theta);
    }
    return 0.0;
}

double fitted_lr_from_mean(const Family& family, std::size_t n, double mean, double theta) {
    if (n == 0) throw Error(Errc::EmptyWindow, "fitted likelihood ratio needs observations");
    const double estimate = clamp_to_domain(family, mean);
    double per_obs = kl(family, estimate, theta);
    if (estimate != mean) {
        per_obs += (mean - estimate) *
                   (canonical_parameter(family, estimate) - canonical_parameter(family, theta));
    }
    return static_cast<double>(n) * per_obs;
}

double fitted_lr(const Family& family, std::span<const double> window, double theta) {
    if (window.empty()) throw Error(Errc::EmptyWindow, "fitted likelihood ratio needs observations");
    require_support(family, window);
    const double mean =
        std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    return fitted_lr_from_mean(family, window.size(), mean, theta);
}

void sample_into(const Family& family, double theta, std::size_t n, Rng& rng,
                 std::vector<double>& out) {
    validate(family);
    require_domain(family, theta);
    out.reserve(out.size() + n);
    switch (family.kind) {
        case FamilyKind::Gaussian: {
            std::normal_distribution<double> eps(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) out.push_back(theta + family.gaussian_sigma * eps(rng));
            break;
        }
        case FamilyKind::Volatility: {
            std::normal_distribution<double> eps(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double e = eps(rng);
                out.push_back(theta * e * e);
            }
            break;
        }
        case FamilyKind::Poisson: {
            std::poisson_distribution<long long> draw(theta);
            for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<double>(draw(rng)));
            break;
        }
        case FamilyKind::Exponential: {
            std::exponential_distribution<double> draw(1.0 / theta);
            for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng));
            break;
        }
        case FamilyKind::Bernoulli: {
            std::bernoulli_distribution draw(theta);
            for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng) ? 1.0 : 0.0);
            break;
        }
    }
}

std::vector<double> sample(const Family& family, double theta, std::size_t n, Rng& rng) {
    std::vector<double> out;
    sample_into(family, theta, n, rng, out);
    return out;
}

std::vector<double> sample(const Family& family, double theta, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample(family, theta, n, rng);
}

RiskEstimate parametric_risk(const Family& family, double theta_star, std::size_t n, double r,
                             std::size_t m_reps, std::uint64_t seed, std::size_t threads) {
    validate(family);
    require_domain(family, theta_star);
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw Error(Errc::InvalidArgument, "risk power r must be positive, got " + describe(r));
    }
    if (n == 0) throw Error(Errc::EmptyWindow, "risk bound needs a positive window length");
    if (m_reps < 100) {
        throw Error(Errc::InvalidArgument,
                    "risk bound needs at least 100 replications, got " + std::to_string(m_reps));
    }
    std::vector<double> losses(m_reps);
    parallel_for(m_reps, threads, [&](std::size_t i) {
        const auto window = sample(family, theta_star, n, replication_seed(seed, i));
        losses[i] = std::pow(std::abs(fitted_lr(family, window, theta_star)), r);
    });
    const double m = static_cast<double>(m_reps);
    const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / m;
    double ss = 0.0;
    for (double x : losses) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

double parametric_risk_bound(const Family& family, double theta_star, std::size_t n, double r,
                             std::size_t m_reps, std::uint64_t seed, std::size_t threads) {
    return parametric_risk(family, theta_star, n, r, m_reps, seed, threads).mean;
}

}  // namespace locpar
