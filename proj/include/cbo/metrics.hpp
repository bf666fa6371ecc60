#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cbo/consensus.hpp"
#include "cbo/core.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/metrics_basic.hpp"
#include "cbo/schedule.hpp"

namespace cbo {

namespace detail {

// Jonker-Volgenant shortest augmenting path assignment (square cost matrix).
// Returns the minimal total cost.
inline double solve_assignment(const std::vector<Vec>& cost) {
    const std::size_t n = cost.size();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            std::size_t j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j] != 0) total += cost[p[j] - 1][j - 1];
    return total;
}

}  // namespace detail

// W2 between equal-size empirical measures: sqrt of the optimal-assignment
// mean squared displacement. Exact solver, capped at n = 512 (O(n^3)).
inline double w2_exact(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("w2_exact: size mismatch");
    if (a.rows() == 0) throw std::invalid_argument("w2_exact: empty point sets");
    if (a.rows() > 512) throw std::invalid_argument("w2_exact: n > 512 not supported");
    const std::size_t n = a.rows();
    std::vector<Vec> cost(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i][j] = sq_dist(a.row(i), b.row(j));
    return std::sqrt(detail::solve_assignment(cost) / static_cast<double>(n));
}

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int n_points = 0;
};

inline FitResult linear_fit(const Vec& xs, const Vec& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("linear_fit: need >= 2 paired points");
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.n_points = static_cast<int>(n);
    if (syy == 0.0) {
        fit.r_squared = 1.0;  // constant data, perfectly reproduced
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

// OLS on (log x, log y); the workhorse behind the O(1/alpha) and O(1/n)
// scaling checks.
inline FitResult loglog_slope(const Vec& xs, const Vec& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 paired points");
    Vec lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("loglog_slope: data must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return linear_fit(lx, ly);
}

struct BlockContraction {
    double rho = 0.0;
    double floor = 0.0;
    int n_blocks = 0;
};

// Fits u_{j+1} ~ rho u_j + floor on MSE values sampled at block boundaries
// k_j = first index with t_k >= j T_block (nearest recorded row at or after
// k_j when the cadence skips it).
inline BlockContraction block_contraction_fit(const RunRecord& record, double t_block) {
    if (!(t_block > 0.0))
        throw std::invalid_argument("block_contraction_fit: T_block must be > 0");
    Vec u;
    for (int j = 0;; ++j) {
        const long k_j = first_index_reaching(j * t_block, record.config.eta0,
                                              record.config.zeta);
        const auto it = std::find_if(record.rows.begin(), record.rows.end(),
                                     [&](const RunRow& r) { return r.k >= k_j; });
        if (it == record.rows.end()) break;
        u.push_back(it->mse);
        if (j > 0 && it->k == record.rows.back().k) break;
    }
    if (u.size() < 4)
        throw std::invalid_argument("block_contraction_fit: fewer than 4 blocks recorded");
    Vec prev(u.begin(), u.end() - 1), next(u.begin() + 1, u.end());
    const FitResult fit = linear_fit(prev, next);
    return {fit.slope, fit.intercept, static_cast<int>(u.size())};
}

struct GaussianProximity {
    bool var_in_band = false;
    double excess_kurtosis = 0.0;
    Vec coord_variance;
};

// Long-run marginal diagnostic: per-coordinate variance against the band
// [gamma/(2 alpha), max(gamma/alpha, sigma0^2)] with 20% slack, plus pooled
// excess kurtosis of the standardized coordinates (0 for a Gaussian).
inline GaussianProximity gaussian_proximity(const Matrix& positions, double alpha,
                                            double gamma, double sigma0_sq) {
    const std::size_t n = positions.rows(), d = positions.cols();
    if (n < 100) throw std::invalid_argument("gaussian_proximity: need n >= 100");

    GaussianProximity rep;
    rep.coord_variance.resize(d);
    const double lo = 0.8 * gamma / (2.0 * alpha);
    const double hi = 1.2 * std::max(gamma / alpha, sigma0_sq);
    rep.var_in_band = true;

    double m4 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += positions(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = positions(i, j) - mean;
            var += c * c;
        }
        var /= (n - 1);
        rep.coord_variance[j] = var;
        if (!(var >= lo && var <= hi)) rep.var_in_band = false;
        if (var > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double z = (positions(i, j) - mean) / std::sqrt(var);
                m4 += z * z * z * z;
            }
        }
    }
    rep.excess_kurtosis = m4 / static_cast<double>(n * d) - 3.0;
    return rep;
}

}  // namespace cbo
