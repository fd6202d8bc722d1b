#pragma once

// Independent reference computations for the test suites. Nothing here calls the
// library's closed forms; densities come from Boost.Math and integrals from
// Boost quadrature or explicit series.

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <span>
#include <limits>
#include <stdexcept>

#include "locpar/family.hpp"

namespace locpar::testing {

inline double oracle_kl(const Family& f, double a, double b) {
    namespace bm = boost::math;
    namespace q = boost::math::quadrature;
    switch (f.kind) {
        case FamilyKind::Gaussian: {
            const bm::normal pa(a, f.gaussian_sigma), pb(b, f.gaussian_sigma);
            auto integrand = [&](double y) {
                const double p = bm::pdf(pa, y);
                if (p == 0.0) return 0.0;
                const double la = -0.5 * std::pow((y - a) / f.gaussian_sigma, 2);
                const double lb = -0.5 * std::pow((y - b) / f.gaussian_sigma, 2);
                return p * (la - lb);
            };
            return q::sinh_sinh<double>().integrate(integrand, 1e-14);
        }
        case FamilyKind::Volatility: {
            // Y = theta * eps^2 is gamma(1/2, scale 2 theta); substitute y = u^2 to remove
            // the integrable singularity at the origin
            const bm::gamma_distribution<double> pa(0.5, 2.0 * a);
            auto integrand = [&](double u) {
                const double y = u * u;
                if (!(y > 0.0) || !std::isfinite(y)) return 0.0;
                const double p = bm::pdf(pa, y);
                if (p == 0.0) return 0.0;
                // log density ratio written out from the gamma(1/2) kernel
                const double log_ratio = 0.5 * std::log(b / a) - y / (2.0 * a) + y / (2.0 * b);
                return 2.0 * u * p * log_ratio;
            };
            return q::exp_sinh<double>().integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
        }
        case FamilyKind::Exponential: {
            const bm::exponential pa(1.0 / a);
            auto integrand = [&](double y) {
                const double p = bm::pdf(pa, y);
                if (p == 0.0) return 0.0;
                return p * (std::log(b / a) - y / a + y / b);
            };
            return q::exp_sinh<double>().integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
        }
        case FamilyKind::Poisson: {
            const bm::poisson pa(a);
            double sum = 0.0;
            for (int k = 0; k <= 400; ++k) {
                const double p = bm::pdf(pa, k);
                if (p == 0.0) continue;
                sum += p * (k * std::log(a / b) - a + b);
            }
            return sum;
        }
        case FamilyKind::Bernoulli:
            return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    }
    throw std::logic_error("unknown family");
}

/// Sum of log-density differences over a window, via Boost.Math densities.
inline double oracle_log_lik(const Family& f, std::span<const double> window, double theta) {
    namespace bm = boost::math;
    double sum = 0.0;
    for (double y : window) {
        switch (f.kind) {
            case FamilyKind::Gaussian: sum += std::log(bm::pdf(bm::normal(theta, f.gaussian_sigma), y)); break;
            case FamilyKind::Volatility:
                sum += std::log(bm::pdf(bm::gamma_distribution<double>(0.5, 2.0 * theta), y));
                break;
            case FamilyKind::Exponential: sum += std::log(bm::pdf(bm::exponential(1.0 / theta), y)); break;
            case FamilyKind::Poisson:
                sum += y * std::log(theta) - theta - std::lgamma(y + 1.0);
                break;
            case FamilyKind::Bernoulli: sum += y == 1.0 ? std::log(theta) : std::log(1.0 - theta); break;
        }
    }
    return sum;
}

}  // namespace locpar::testing
