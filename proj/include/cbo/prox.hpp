#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "cbo/core.hpp"
#include "cbo/objectives.hpp"

namespace cbo {

namespace detail {

inline Vec project_ball(std::span<const double> y, std::span<const double> center,
                        double radius) {
    Vec out(y.begin(), y.end());
    double r2 = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double u = y[j] - center[j];
        r2 += u * u;
    }
    const double r = std::sqrt(r2);
    if (r > radius) {
        const double scale = radius / r;
        for (std::size_t j = 0; j < y.size(); ++j)
            out[j] = center[j] + scale * (y[j] - center[j]);
    }
    return out;
}

}  // namespace detail

// Minimizer of f(y) + ||y - x||^2 / (2 gamma_eff) over the closed ball
// B(x*, delta), by projected gradient descent with finite-difference
// gradients. Globalization uses strict Armijo backtracking; once the true
// decrease falls below the fp resolution of the objective, the solver
// switches to gradient-only polishing steps whose size is controlled by the
// projected-gradient norm instead of function comparisons. Convergence is
// declared at projected-gradient norm <= tol, measured at a fixed probe step.
// When gamma_eff > 2||x - x*|| / (delta^(beta-1) kappa) the minimizer is
// interior and coincides with the unrestricted one.
inline Vec prox(const ObjectiveSpec& spec, double gamma_eff, std::span<const double> x,
                double tol = 1e-10, int max_inner = 10000) {
    if (!(gamma_eff > 0.0)) throw std::invalid_argument("prox: gamma_eff must be > 0");
    if (!all_finite(x)) throw std::invalid_argument("prox: non-finite input point");

    const auto objective = [&](std::span<const double> y) {
        return spec.eval(y) + 0.5 * sq_dist(y, x) / gamma_eff;
    };
    const auto gradient = [&](const Vec& y) {
        Vec g = fd_gradient5(spec, y);
        for (std::size_t j = 0; j < y.size(); ++j) g[j] += (y[j] - x[j]) / gamma_eff;
        return g;
    };
    const double probe = std::min(1.0, gamma_eff);
    const auto pg_at = [&](const Vec& y, const Vec& g) {
        Vec trial(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) trial[j] = y[j] - probe * g[j];
        return std::sqrt(sq_dist(detail::project_ball(trial, spec.x_star, spec.delta), y)) /
               probe;
    };

    Vec y = detail::project_ball(x, spec.x_star, spec.delta);
    double fy = objective(y);
    double step = gamma_eff / (1.0 + gamma_eff);
    double pg_norm = std::numeric_limits<double>::infinity();
    int it = 0;

    // Phase 1: certified descent.
    for (; it < max_inner; ++it) {
        const Vec g = gradient(y);
        pg_norm = pg_at(y, g);
        if (pg_norm <= tol) return y;

        bool moved = false;
        int halvings = 0;
        double certified = 0.0;
        while (step >= 1e-16) {
            Vec trial(y.size());
            for (std::size_t j = 0; j < y.size(); ++j) trial[j] = y[j] - step * g[j];
            const Vec y_new = detail::project_ball(trial, spec.x_star, spec.delta);
            const double move2 = sq_dist(y_new, y);
            const double f_new = objective(y_new);
            if (f_new <= fy - 0.5 * move2 / step) {
                certified = 0.5 * move2 / step;
                y = y_new;
                fy = f_new;
                moved = true;
                break;
            }
            step *= 0.5;
            ++halvings;
        }
        // Once the certified decrease sinks below the fp resolution of the
        // objective, function comparisons carry no information: polish
        // without them.
        if (!moved || certified <= 4e-16 * (1.0 + std::fabs(fy))) break;
        if (halvings == 0) step = std::min(step * 1.25, 1e3);
    }

    // Phase 2: fixed-step polish. The step is halved from the best-seen point
    // whenever the residual explodes or stagnates (the latter catches the
    // neutrally stable period-2 cycle at step * curvature = 2).
    double s_bar = probe;
    Vec best_y = y;
    double best_pg = pg_norm;
    int since_improvement = 0;
    for (; it < max_inner; ++it) {
        const Vec g = gradient(y);
        pg_norm = pg_at(y, g);
        if (pg_norm <= tol) return y;
        if (pg_norm < 0.999 * best_pg) {
            best_pg = pg_norm;
            best_y = y;
            since_improvement = 0;
        } else if (++since_improvement >= 12 || pg_norm > 4.0 * best_pg) {
            y = best_y;
            s_bar *= 0.5;
            since_improvement = 0;
            if (s_bar < 1e-13) break;
            continue;
        }
        Vec trial(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) trial[j] = y[j] - s_bar * g[j];
        y = detail::project_ball(trial, spec.x_star, spec.delta);
    }
    throw std::runtime_error("prox: no convergence after " + std::to_string(it) +
                             " iterations, projected-gradient norm " +
                             std::to_string(best_pg));
}

// Closed form for the quadratic objective (lambda/2)||y - x*||^2:
// x* + (x - x*) / (1 + gamma_eff lambda).
inline Vec prox_quadratic_closed_form(const ObjectiveSpec& spec, double gamma_eff,
                                      std::span<const double> x) {
    Vec out(x.size());
    const double shrink = 1.0 / (1.0 + gamma_eff * spec.lambda);
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = spec.x_star[j] + shrink * (x[j] - spec.x_star[j]);
    return out;
}

}  // namespace cbo
