#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locpar/random.hpp"

namespace locpar {

/// Clamp applied to MLEs that land on the boundary of the parameter domain.
inline constexpr double kClampEpsilon = 1e-6;

enum class FamilyKind { Gaussian, Volatility, Poisson, Exponential, Bernoulli };

/**
 * @brief One-parameter exponential-family observation model in mean parameterization.
 *
 * - Gaussian:    Y ~ N(theta, sigma^2), sigma fixed and known
 * - Volatility:  Y = theta * eps^2, eps ~ N(0, 1)  (gamma with shape 1/2, scale 2 theta)
 * - Poisson:     Y ~ Poisson(theta)
 * - Exponential: Y ~ Exp(mean theta)
 * - Bernoulli:   Y ~ Bernoulli(theta)
 *
 * In every case E[Y] = theta, so the MLE over a window is the sample mean.
 */
struct Family {
    FamilyKind kind = FamilyKind::Gaussian;
    double gaussian_sigma = 1.0;  ///< Ignored unless kind == Gaussian.

    [[nodiscard]] static Family gaussian(double sigma = 1.0) { return {FamilyKind::Gaussian, sigma}; }
    [[nodiscard]] static Family volatility() { return {FamilyKind::Volatility, 1.0}; }
    [[nodiscard]] static Family poisson() { return {FamilyKind::Poisson, 1.0}; }
    [[nodiscard]] static Family exponential() { return {FamilyKind::Exponential, 1.0}; }
    [[nodiscard]] static Family bernoulli() { return {FamilyKind::Bernoulli, 1.0}; }

    friend bool operator==(const Family& a, const Family& b) noexcept {
        if (a.kind != b.kind) return false;
        return a.kind != FamilyKind::Gaussian || a.gaussian_sigma == b.gaussian_sigma;
    }
};

[[nodiscard]] std::string_view to_string(FamilyKind kind) noexcept;
/// Accepts the lower-case names returned by to_string. Throws Error(InvalidArgument).
[[nodiscard]] FamilyKind parse_family_kind(std::string_view name);

/// Throws DomainViolation unless sigma > 0 for Gaussian.
void validate(const Family& family);

[[nodiscard]] bool in_domain(const Family& family, double theta) noexcept;
[[nodiscard]] bool in_support(const Family& family, double y) noexcept;
void require_domain(const Family& family, double theta);
void require_support(const Family& family, std::span<const double> window);

/// Pulls a mean onto the open parameter domain using kClampEpsilon.
[[nodiscard]] double clamp_to_domain(const Family& family, double mean) noexcept;

/// Sample mean of the window, clamped into the open domain.
[[nodiscard]] double mle(const Family& family, std::span<const double> window);

/// Closed-form Kullback-Leibler divergence K(theta_a, theta_b).
[[nodiscard]] double kl(const Family& family, double theta_a, double theta_b);

/// log p_theta(y). Volatility at y = 0 returns +inf (the density has a pole there).
[[nodiscard]] double log_density(const Family& family, double theta, double y);

/// Canonical parameter v with p_theta(y) proportional to exp(y v - A(v)).
[[nodiscard]] double canonical_parameter(const Family& family, double theta);

/**
 * @brief Fitted log-likelihood ratio L(theta_hat, theta) from sufficient statistics.
 *
 * Returns N * [ybar (v(a) - v(b)) - (A(v(a)) - A(v(b)))] with a the clamped estimate.
 * When the estimate is interior (a == ybar) this is exactly N * K(a, theta); when it
 * was clamped the correction term N (ybar - a)(v(a) - v(b)) keeps the result equal
 * to sum_i [log p_a(Y_i) - log p_theta(Y_i)]. Nonnegative whenever theta lies inside
 * the clamped domain.
 */
[[nodiscard]] double fitted_lr_from_mean(const Family& family, std::size_t n, double mean,
                                         double theta);
[[nodiscard]] double fitted_lr(const Family& family, std::span<const double> window, double theta);

/// n i.i.d. draws from p_theta.
[[nodiscard]] std::vector<double> sample(const Family& family, double theta, std::size_t n, Rng& rng);
[[nodiscard]] std::vector<double> sample(const Family& family, double theta, std::size_t n,
                                         std::uint64_t seed);
/// Appends n draws to `out`.
void sample_into(const Family& family, double theta, std::size_t n, Rng& rng, std::vector<double>& out);

/// Monte Carlo estimate of E|N * K(theta_hat_N, theta_star)|^r under p_{theta_star}.
struct RiskEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

[[nodiscard]] RiskEstimate parametric_risk(const Family& family, double theta_star, std::size_t n,
                                           double r, std::size_t m_reps, std::uint64_t seed,
                                           std::size_t threads = 1);
[[nodiscard]] double parametric_risk_bound(const Family& family, double theta_star, std::size_t n,
                                           double r, std::size_t m_reps, std::uint64_t seed,
                                           std::size_t threads = 1);

}  // namespace locpar
