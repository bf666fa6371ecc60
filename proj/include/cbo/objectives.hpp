#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "cbo/core.hpp"
#include "cbo/rng.hpp"

namespace cbo {

// Objective with the regularity metadata the analysis needs: a unique
// minimizer x*, growth f(x) >= f* + (kappa/2)||x-x*||^beta, gradient growth
// ||grad f(x)|| <= L(1+||x||^a), and lambda-strong convexity on B(x*, delta).
// delta = 1e6 stands in for "the whole space".
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    std::function<double(std::span<const double>)> eval;
    Vec x_star;
    double f_star = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double kappa = 0.0;
    double beta = 1.0;
    double lip_L = 0.0;
    double growth_a = 1.0;
    // false only for the stress objective whose growth bound fails globally
    bool growth_globally_valid = true;

    double operator()(std::span<const double> x) const { return eval(x); }
};

inline constexpr double kUnboundedRadius = 1e6;

namespace detail {

inline void require_shift(const Vec& shift, int dim) {
    if (static_cast<int>(shift.size()) != dim)
        throw std::invalid_argument("builtin: shift length does not match dim");
    if (!all_finite(shift)) throw std::invalid_argument("builtin: shift must be finite");
}

}  // namespace detail

inline ObjectiveSpec builtin(const std::string& name, int dim, const Vec& shift) {
    if (dim < 1) throw std::invalid_argument("builtin: dim must be >= 1");
    detail::require_shift(shift, dim);
    const double s = norm(shift);

    ObjectiveSpec spec;
    spec.name = name;
    spec.dim = dim;
    spec.x_star = shift;
    spec.f_star = 0.0;

    if (name == "quadratic") {
        const double lambda = 1.0;
        spec.lambda = lambda;
        spec.delta = kUnboundedRadius;
        spec.kappa = lambda;
        spec.beta = 2.0;
        spec.lip_L = lambda * (1.0 + s);
        spec.growth_a = 1.0;
        spec.eval = [shift, lambda](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double u = x[i] - shift[i];
                r2 += u * u;
            }
            return 0.5 * lambda * r2;
        };
    } else if (name == "quartic_quad") {
        const double lambda = 1.0;
        const double eps = 0.1;
        spec.lambda = lambda;
        spec.delta = kUnboundedRadius;
        spec.kappa = lambda;
        spec.beta = 2.0;
        spec.lip_L = lambda * (1.0 + s) + 16.0 * eps * (1.0 + s) * (1.0 + s) * (1.0 + s);
        spec.growth_a = 3.0;
        spec.eval = [shift, lambda, eps](std::span<const double> x) {
            double r2 = 0.0, r4 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double u = x[i] - shift[i];
                r2 += u * u;
                r4 += u * u * u * u;
            }
            return 0.5 * lambda * r2 + eps * r4;
        };
    } else if (name == "rastrigin") {
        spec.lambda = 2.0;
        spec.delta = 0.05;
        spec.kappa = 2.0;
        spec.beta = 2.0;
        spec.lip_L = 2.0 * (1.0 + s) + 20.0 * std::numbers::pi * std::sqrt(double(dim));
        spec.growth_a = 1.0;
        spec.eval = [shift, dim](std::span<const double> x) {
            double r2 = 0.0, c = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double u = x[i] - shift[i];
                r2 += u * u;
                c += std::cos(2.0 * std::numbers::pi * u);
            }
            return r2 + 10.0 * dim - 10.0 * c;
        };
    } else if (name == "ackley") {
        // Bounded at ~20+e, so the quadratic growth bound fails at large radii.
        spec.lambda = 1.0;
        spec.delta = 1e-3;
        spec.kappa = 0.1;
        spec.beta = 2.0;
        spec.lip_L = 25.0;
        spec.growth_a = 1.0;
        spec.growth_globally_valid = false;
        spec.eval = [shift, dim](std::span<const double> x) {
            double r2 = 0.0, c = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double u = x[i] - shift[i];
                r2 += u * u;
                c += std::cos(2.0 * std::numbers::pi * u);
            }
            const double inv_d = 1.0 / dim;
            return -20.0 * std::exp(-0.2 * std::sqrt(r2 * inv_d)) - std::exp(c * inv_d) +
                   20.0 + std::numbers::e;
        };
    } else {
        throw std::invalid_argument("builtin: unknown objective '" + name + "'");
    }
    return spec;
}

inline Vec evaluate_batch(const ObjectiveSpec& spec, const Matrix& positions) {
    if (positions.rows() > 0 && static_cast<int>(positions.cols()) != spec.dim)
        throw std::invalid_argument("evaluate_batch: column count != objective dim");
    if (!all_finite(positions.flat()))
        throw std::invalid_argument("evaluate_batch: non-finite position");
    Vec values(positions.rows());
    parallel_for(positions.rows(),
                 [&](std::size_t i) { values[i] = spec.eval(positions.row(i)); });
    return values;
}

// Central differences with h = 1e-5 (1 + ||x||): balances truncation against
// rounding at double precision.
inline Vec fd_gradient(const ObjectiveSpec& spec, std::span<const double> x) {
    const double h = 1e-5 * (1.0 + norm(x));
    Vec g(x.size()), probe(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double xj = probe[j];
        probe[j] = xj + h;
        const double fp = spec.eval(probe);
        probe[j] = xj - h;
        const double fm = spec.eval(probe);
        probe[j] = xj;
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Five-point stencil, truncation O(h^4). The larger step keeps the rounding
// floor near 1e-12 |f|, which the inner prox solver needs to hit its 1e-10
// residual tolerance.
inline Vec fd_gradient5(const ObjectiveSpec& spec, std::span<const double> x) {
    const double h = 1e-4 * (1.0 + norm(x));
    Vec g(x.size()), probe(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double xj = probe[j];
        probe[j] = xj + 2.0 * h;
        const double f2p = spec.eval(probe);
        probe[j] = xj + h;
        const double f1p = spec.eval(probe);
        probe[j] = xj - h;
        const double f1m = spec.eval(probe);
        probe[j] = xj - 2.0 * h;
        const double f2m = spec.eval(probe);
        probe[j] = xj;
        g[j] = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h);
    }
    return g;
}

struct GrowthReport {
    bool pass = false;
    double worst_violation = 0.0;  // most negative margin of f - f* - (kappa/2) r^beta
    Vec worst_point;
};

// Uniform sample in the closed ball B(center, radius).
inline Vec sample_in_ball(std::span<const double> center, double radius,
                          std::uint64_t seed, std::uint32_t index) {
    const std::size_t d = center.size();
    Vec x(d);
    double n2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        x[j] = gaussian_at(seed, Stream::ball_sampling, index, 0,
                           static_cast<std::uint32_t>(j));
        n2 += x[j] * x[j];
    }
    const double u = uniform_at(seed, Stream::ball_sampling, index, 1, 0);
    const double r = radius * std::pow(u, 1.0 / static_cast<double>(d));
    const double scale = (n2 > 0.0) ? r / std::sqrt(n2) : 0.0;
    for (std::size_t j = 0; j < d; ++j) x[j] = center[j] + scale * x[j];
    return x;
}

inline GrowthReport check_growth(const ObjectiveSpec& spec, double radius, int samples,
                                 std::uint64_t seed) {
    if (radius <= 0.0) throw std::invalid_argument("check_growth: radius must be > 0");
    if (samples < 1) throw std::invalid_argument("check_growth: samples must be >= 1");
    GrowthReport report;
    report.pass = true;
    report.worst_violation = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        Vec x = sample_in_ball(spec.x_star, radius, seed, static_cast<std::uint32_t>(i));
        const double r = std::sqrt(sq_dist(x, spec.x_star));
        const double margin =
            spec.eval(x) - spec.f_star - 0.5 * spec.kappa * std::pow(r, spec.beta);
        if (margin < report.worst_violation) {
            report.worst_violation = margin;
            report.worst_point = x;
        }
    }
    report.pass = report.worst_violation >= -1e-12;
    return report;
}

}  // namespace cbo
