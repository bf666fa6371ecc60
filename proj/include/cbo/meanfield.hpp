#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbo/consensus.hpp"
#include "cbo/core.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/objectives.hpp"
#include "cbo/prox.hpp"
#include "cbo/rng.hpp"

namespace cbo {

// Variance scale of the Gaussian mean-field law: the law at time t is
// N(m_t, (gamma_t / alpha) I_d) with gamma_t interpolating from alpha sigma0^2
// to gamma along e^{-2t}.
inline double gamma_t(double t, double alpha, double gamma, double sigma0_sq) {
    if (t < 0.0) throw std::invalid_argument("gamma_t: t must be >= 0");
    const double decay = std::exp(-2.0 * t);
    return alpha * sigma0_sq * decay + (1.0 - decay) * gamma;
}

// Earliest time at which gamma_t reaches gamma/2; zero when
// sigma0^2 >= gamma/(2 alpha).
inline double warmup_time(double alpha, double gamma, double sigma0_sq) {
    const double slack = std::max(0.0, 1.0 - 2.0 * alpha * sigma0_sq / gamma);
    return 0.5 * std::log1p(slack);
}

struct ThetaEstimate {
    Vec estimate;
    double std_error = 0.0;
    double ess = 0.0;  // +inf marks an exact (closed-form or quadrature) path
};

// Self-normalized importance sampling of theta_alpha(N(m, var I_d)) with the
// Gaussian itself as proposal and log-domain weight stabilization. Streaming
// accumulators keep the reduction order fixed, so the result is a pure
// function of (inputs, seed, stream_block).
inline ThetaEstimate theta_gaussian_mc(const ObjectiveSpec& spec, const Vec& m, double var,
                                       double alpha, long samples, std::uint64_t seed,
                                       std::uint32_t stream_block = 0) {
    if (samples < 100) throw std::invalid_argument("theta_gaussian: samples must be >= 100");
    if (!(var > 0.0)) throw std::invalid_argument("theta_gaussian: var must be > 0");
    if (static_cast<int>(m.size()) != spec.dim)
        throw std::invalid_argument("theta_gaussian: mean length != objective dim");

    const std::size_t d = m.size();
    const double sd = std::sqrt(var);
    double max_lw = -std::numeric_limits<double>::infinity();
    double w_sum = 0.0, w2_sum = 0.0;
    Vec sx(d, 0.0), sx_w2(d, 0.0), sxx_w2(d, 0.0);
    Vec x(d);

    for (long s = 0; s < samples; ++s) {
        for (std::size_t j = 0; j < d; ++j)
            x[j] = m[j] + sd * gaussian_at(seed, Stream::mc_sampling,
                                           static_cast<std::uint32_t>(s), stream_block,
                                           static_cast<std::uint32_t>(j));
        const double lw = -alpha * spec.eval(x);
        if (lw > max_lw) {
            const double c = std::exp(max_lw - lw);  // 0 on the first sample
            const double c2 = c * c;
            w_sum *= c;
            w2_sum *= c2;
            for (std::size_t j = 0; j < d; ++j) {
                sx[j] *= c;
                sx_w2[j] *= c2;
                sxx_w2[j] *= c2;
            }
            max_lw = lw;
        }
        const double w = std::exp(lw - max_lw);
        const double w2 = w * w;
        w_sum += w;
        w2_sum += w2;
        for (std::size_t j = 0; j < d; ++j) {
            sx[j] += w * x[j];
            sx_w2[j] += w2 * x[j];
            sxx_w2[j] += w2 * x[j] * x[j];
        }
    }

    ThetaEstimate out;
    out.estimate.resize(d);
    for (std::size_t j = 0; j < d; ++j) out.estimate[j] = sx[j] / w_sum;
    out.ess = w_sum * w_sum / w2_sum;
    if (out.ess < 10.0)
        throw std::runtime_error(
            "theta_gaussian: importance-weight ESS " + std::to_string(out.ess) +
            " < 10; increase samples or reduce the alpha*var mismatch");
    // Delta-method variance of the self-normalized estimate, summed over
    // coordinates.
    double var_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double th = out.estimate[j];
        var_sum += (sxx_w2[j] - 2.0 * th * sx_w2[j] + th * th * w2_sum) / (w_sum * w_sum);
    }
    out.std_error = std::sqrt(std::max(0.0, var_sum));
    return out;
}

// Exact tilted mean for the quadratic objective (product of Gaussians).
inline ThetaEstimate theta_gaussian_quadratic(const ObjectiveSpec& spec, const Vec& m,
                                              double var, double alpha) {
    const double precision = 1.0 / var + alpha * spec.lambda;
    ThetaEstimate out;
    out.estimate.resize(m.size());
    for (std::size_t j = 0; j < m.size(); ++j)
        out.estimate[j] = (m[j] / var + alpha * spec.lambda * spec.x_star[j]) / precision;
    out.std_error = 0.0;
    out.ess = std::numeric_limits<double>::infinity();
    return out;
}

inline ThetaEstimate theta_gaussian(const ObjectiveSpec& spec, const Vec& m, double var,
                                    double alpha, long samples, std::uint64_t seed,
                                    std::uint32_t stream_block = 0) {
    if (spec.name == "quadratic") return theta_gaussian_quadratic(spec, m, var, alpha);
    return theta_gaussian_mc(spec, m, var, alpha, samples, seed, stream_block);
}

namespace detail {

// One-dimensional deterministic route: composite Simpson on the log-stabilized
// tilted integrand. Resolves gaps far below any Monte Carlo noise floor; used
// by the gap estimator where the O(1/alpha) signal would drown in IS variance.
inline double theta_tilted_simpson(const ObjectiveSpec& spec, double m, double var,
                                   double alpha, long nodes) {
    const auto big_g = [&](double x) {
        const double u = x - m;
        const Vec xv{x};
        return alpha * spec.eval(xv) + 0.5 * u * u / var;
    };
    // Coarse bracket of the minimizer, then ternary refinement.
    const double sd = std::sqrt(var);
    double lo = std::min(spec.x_star[0], m) - (std::fabs(m - spec.x_star[0]) + 10.0 * sd + 1.0);
    double hi = std::max(spec.x_star[0], m) + (std::fabs(m - spec.x_star[0]) + 10.0 * sd + 1.0);
    double best_x = lo, best_g = big_g(lo);
    const int coarse = 4096;
    for (int i = 1; i <= coarse; ++i) {
        const double x = lo + (hi - lo) * i / coarse;
        const double g = big_g(x);
        if (g < best_g) {
            best_g = g;
            best_x = x;
        }
    }
    double a = best_x - (hi - lo) / coarse, b = best_x + (hi - lo) / coarse;
    while (b - a > 1e-13 * (1.0 + std::fabs(best_x))) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (big_g(m1) < big_g(m2))
            b = m2;
        else
            a = m1;
    }
    const double x_hat = 0.5 * (a + b);
    const double g_hat = big_g(x_hat);

    // Curvature-based window, expanded until the tails are negligible.
    const double h_fd = std::max(1e-6, 1e-4 * sd);
    const double curv =
        std::max((big_g(x_hat + h_fd) - 2.0 * g_hat + big_g(x_hat - h_fd)) / (h_fd * h_fd),
                 1e-12);
    double half = std::max({15.0 / std::sqrt(curv), std::fabs(m - x_hat) + 10.0 * sd, 1.0});
    while ((big_g(x_hat - half) - g_hat < 40.0 || big_g(x_hat + half) - g_hat < 40.0) &&
           half < 1e6)
        half *= 1.5;

    const double wlo = x_hat - half, whi = x_hat + half;
    const double step = (whi - wlo) / static_cast<double>(nodes - 1);
    double num = 0.0, den = 0.0;
    for (long i = 0; i < nodes; ++i) {
        const double x = wlo + step * static_cast<double>(i);
        const double w = std::exp(-(big_g(x) - g_hat));
        const double coeff = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        num += coeff * w * x;
        den += coeff * w;
    }
    return num / den;
}

}  // namespace detail

inline ThetaEstimate theta_gaussian_quadrature(const ObjectiveSpec& spec, const Vec& m,
                                               double var, double alpha) {
    if (spec.dim != 1)
        throw std::invalid_argument("theta_gaussian_quadrature: only d = 1 supported");
    const double coarse = detail::theta_tilted_simpson(spec, m[0], var, alpha, 8193);
    const double fine = detail::theta_tilted_simpson(spec, m[0], var, alpha, 16385);
    ThetaEstimate out;
    out.estimate = {fine};
    out.std_error = std::fabs(fine - coarse) + 1e-15;
    out.ess = std::numeric_limits<double>::infinity();
    return out;
}

struct GaussianFlowState {
    double t = 0.0;
    Vec x_t;      // ODE state, x_0 = 0
    Vec m_t;      // law mean m0 e^{-t} + x_t
    double gamma_t = 0.0;
};

// Classical 4th-order integration of x' = clip_R(theta_alpha(rho_t)) - x with
// rho_t = N(m0 e^{-t} + x, (gamma_t/alpha) I_d). States returned at multiples
// of h.
inline std::vector<GaussianFlowState> integrate_mean_flow(const ObjectiveSpec& spec,
                                                          const CboConfig& cfg, double T,
                                                          double h, long samples = 20000) {
    if (!(h > 0.0 && h <= 0.1))
        throw std::invalid_argument("integrate_mean_flow: h must be in (0, 0.1]");
    if (T < h) throw std::invalid_argument("integrate_mean_flow: T must be >= h");

    const std::size_t d = spec.dim;
    const Vec mean0 = cfg.initial_mean();
    std::uint32_t eval_counter = 0;

    const auto drift = [&](double t, const Vec& x) {
        Vec m(d);
        const double decay = std::exp(-t);
        for (std::size_t j = 0; j < d; ++j) m[j] = mean0[j] * decay + x[j];
        const double g = gamma_t(t, cfg.alpha, cfg.gamma, cfg.sigma0_sq);
        const ThetaEstimate th =
            theta_gaussian(spec, m, g / cfg.alpha, cfg.alpha, samples, cfg.seed, eval_counter++);
        Vec rhs = clip(th.estimate, cfg.clip_radius);
        for (std::size_t j = 0; j < d; ++j) rhs[j] -= x[j];
        return rhs;
    };

    const long steps = static_cast<long>(std::llround(T / h));
    std::vector<GaussianFlowState> states;
    states.reserve(steps + 1);
    Vec x(d, 0.0);

    const auto record = [&](double t) {
        GaussianFlowState st;
        st.t = t;
        st.x_t = x;
        st.m_t.resize(d);
        const double decay = std::exp(-t);
        for (std::size_t j = 0; j < d; ++j) st.m_t[j] = mean0[j] * decay + x[j];
        st.gamma_t = gamma_t(t, cfg.alpha, cfg.gamma, cfg.sigma0_sq);
        states.push_back(std::move(st));
    };

    record(0.0);
    for (long k = 0; k < steps; ++k) {
        const double t = h * static_cast<double>(k);
        const Vec k1 = drift(t, x);
        Vec x2(d), x3(d), x4(d);
        for (std::size_t j = 0; j < d; ++j) x2[j] = x[j] + 0.5 * h * k1[j];
        const Vec k2 = drift(t + 0.5 * h, x2);
        for (std::size_t j = 0; j < d; ++j) x3[j] = x[j] + 0.5 * h * k2[j];
        const Vec k3 = drift(t + 0.5 * h, x3);
        for (std::size_t j = 0; j < d; ++j) x4[j] = x[j] + h * k3[j];
        const Vec k4 = drift(t + h, x4);
        for (std::size_t j = 0; j < d; ++j)
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        record(h * static_cast<double>(k + 1));
    }
    return states;
}

enum class GapMethod { automatic, monte_carlo, quadrature };

struct LaplaceGapResult {
    double gap = 0.0;
    double std_error = 0.0;
    double alpha = 0.0;
    double t = 0.0;
    std::vector<std::string> warnings;
};

// Distance between the tilted Gaussian mean and the restricted proximal point
// at the flow-consistent evaluation m_t = (m0 - x*) e^{-t} + m0.
inline LaplaceGapResult laplace_gap(const ObjectiveSpec& spec, const Vec& m0, double t,
                                    double alpha, const CboConfig& cfg, long samples,
                                    std::uint64_t seed,
                                    GapMethod method = GapMethod::automatic) {
    LaplaceGapResult out;
    out.alpha = alpha;
    out.t = t;

    const double t0 = warmup_time(alpha, cfg.gamma, cfg.sigma0_sq);
    if (t < t0)
        out.warnings.push_back("t below the warm-up time " + std::to_string(t0));
    Vec diff(m0.size());
    for (std::size_t j = 0; j < m0.size(); ++j) diff[j] = m0[j] - spec.x_star[j];
    const double K = 2.0 * std::max(cfg.clip_radius, norm(diff));
    if (!(cfg.gamma > 4.0 * K / (spec.kappa * std::pow(spec.delta, spec.beta - 1.0))))
        out.warnings.push_back("gamma below the proximal well-posedness threshold");

    const std::size_t d = m0.size();
    Vec m_t(d);
    const double decay = std::exp(-t);
    for (std::size_t j = 0; j < d; ++j)
        m_t[j] = (m0[j] - spec.x_star[j]) * decay + m0[j];
    const double g = gamma_t(t, alpha, cfg.gamma, cfg.sigma0_sq);

    ThetaEstimate th;
    const bool want_quadrature =
        method == GapMethod::quadrature ||
        (method == GapMethod::automatic && spec.dim == 1 && spec.name != "quadratic");
    if (want_quadrature)
        th = theta_gaussian_quadrature(spec, m_t, g / alpha, alpha);
    else
        th = theta_gaussian(spec, m_t, g / alpha, alpha, samples, seed);

    const Vec p = prox(spec, g, m_t);
    out.gap = std::sqrt(sq_dist(th.estimate, p));
    out.std_error = th.std_error;
    return out;
}

// Simulated mean-field particles: n independent copies driven by the flow's
// deterministic drift, snapshotted at the requested times.
inline std::vector<std::pair<double, Matrix>> simulate_meanfield_particles(
    const ObjectiveSpec& spec, const CboConfig& cfg, int n_particles, double h,
    const std::vector<double>& snapshot_times, long theta_samples = 20000) {
    if (snapshot_times.empty())
        throw std::invalid_argument("simulate_meanfield_particles: no snapshot times");
    const double T = snapshot_times.back();
    const auto flow = integrate_mean_flow(spec, cfg, T, h, theta_samples);

    CboConfig mc_cfg = cfg;
    mc_cfg.n_particles = n_particles;
    ParticleSystem sys = init_particles(mc_cfg);
    const std::size_t n = sys.positions.rows(), d = sys.positions.cols();
    const double noise = std::sqrt(2.0 * cfg.gamma / cfg.alpha) * std::sqrt(h);

    std::vector<std::pair<double, Matrix>> snaps;
    std::size_t next_snap = 0;
    const auto maybe_snapshot = [&](double t) {
        while (next_snap < snapshot_times.size() && t >= snapshot_times[next_snap] - 1e-9) {
            snaps.emplace_back(snapshot_times[next_snap], sys.positions);
            ++next_snap;
        }
    };

    maybe_snapshot(0.0);
    for (std::size_t k = 0; k + 1 < flow.size(); ++k) {
        const ThetaEstimate th =
            theta_gaussian(spec, flow[k].m_t, flow[k].gamma_t / cfg.alpha, cfg.alpha,
                           theta_samples, cfg.seed, static_cast<std::uint32_t>(k));
        const Vec target = clip(th.estimate, cfg.clip_radius);
        parallel_for(n, [&](std::size_t i) {
            auto row = sys.positions.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double xi =
                    gaussian_at(cfg.seed, Stream::scratch, static_cast<std::uint32_t>(k + 1),
                                static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
                row[j] += h * (target[j] - row[j]) + noise * xi;
            }
        });
        maybe_snapshot(flow[k + 1].t);
    }
    return snaps;
}

// Synchronous coupling of the n-particle system with n mean-field copies:
// identical initial draws, identical Brownian increments, drifts differing
// only through empirical-vs-Gaussian consensus. Returns (1/n) sum ||X̄ - X||^2
// at time T. The test hook replaces the finite system's drift by the
// mean-field one, making the recursions identical.
inline double coupled_poc_gap(const ObjectiveSpec& spec, const CboConfig& cfg, double T,
                              double h, bool override_finite_drift = false,
                              long theta_samples = 20000) {
    if (!(h > 0.0 && h <= 0.1)) throw std::invalid_argument("coupled_poc_gap: h in (0, 0.1]");
    const long steps = std::max<long>(1, std::llround(T / h));
    const double h_eff = T / static_cast<double>(steps);

    const auto flow = integrate_mean_flow(spec, cfg, T, h_eff, theta_samples);
    ParticleSystem finite = init_particles(cfg);
    Matrix mf = finite.positions;

    const std::size_t n = finite.positions.rows(), d = finite.positions.cols();
    const double noise_scale = cfg.noise_scale_override
                                   ? *cfg.noise_scale_override
                                   : std::sqrt(2.0 * cfg.gamma / cfg.alpha);
    const double noise = noise_scale * std::sqrt(h_eff);

    for (long k = 0; k < steps; ++k) {
        const ThetaEstimate th_mf =
            theta_gaussian(spec, flow[k].m_t, flow[k].gamma_t / cfg.alpha, cfg.alpha,
                           theta_samples, cfg.seed, static_cast<std::uint32_t>(k));
        const Vec target_mf = clip(th_mf.estimate, cfg.clip_radius);

        Vec target_fin = target_mf;
        if (!override_finite_drift) {
            const Vec values = evaluate_batch(spec, finite.positions);
            const WeightVector w = softmin_weights(values, cfg.alpha);
            target_fin = clip(consensus_point(finite.positions, w), cfg.clip_radius);
        }

        for (std::size_t i = 0; i < n; ++i) {
            auto fin = finite.positions.row(i);
            auto bar = mf.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double xi = gaussian_at(cfg.seed, Stream::coupling_noise,
                                              static_cast<std::uint32_t>(k + 1),
                                              static_cast<std::uint32_t>(i),
                                              static_cast<std::uint32_t>(j));
                fin[j] += h_eff * (target_fin[j] - fin[j]) + noise * xi;
                bar[j] += h_eff * (target_mf[j] - bar[j]) + noise * xi;
            }
        }
    }

    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap += sq_dist(mf.row(i), finite.positions.row(i));
    return gap / static_cast<double>(n);
}

// Discretization gap: the scheduled-step system against the same finite-n
// dynamics on a ~32x finer grid, Brownian increments shared by refinement
// (fine increments sum to the coarse ones). Both are compared at t_{k_T}.
inline double euler_gap(const ObjectiveSpec& spec, const CboConfig& cfg, double T) {
    if (T < 0.0) throw std::invalid_argument("euler_gap: T must be >= 0");
    if (T == 0.0) return 0.0;
    const long k_T = first_index_reaching(T, cfg.eta0, cfg.zeta);
    const double h_ref = step_size(k_T, cfg.eta0, cfg.zeta) / 32.0;

    ParticleSystem coarse = init_particles(cfg);
    ParticleSystem fine = init_particles(cfg);
    const std::size_t n = coarse.positions.rows(), d = coarse.positions.cols();
    const double noise_scale = cfg.noise_scale_override
                                   ? *cfg.noise_scale_override
                                   : std::sqrt(2.0 * cfg.gamma / cfg.alpha);

    const auto drift_target = [&](const Matrix& positions) {
        const Vec values = evaluate_batch(spec, positions);
        const WeightVector w = softmin_weights(values, cfg.alpha);
        return clip(consensus_point(positions, w), cfg.clip_radius);
    };

    for (long k = 1; k <= k_T; ++k) {
        const double eta = step_size(k, cfg.eta0, cfg.zeta);
        const long subs = std::max<long>(1, static_cast<long>(std::ceil(eta / h_ref)));
        const double h_sub = eta / static_cast<double>(subs);

        // Fine increments for this coarse interval; their sums drive the
        // coarse step.
        Matrix coarse_incr(n, d, 0.0);
        const Vec coarse_target = drift_target(coarse.positions);
        for (long s = 0; s < subs; ++s) {
            const Vec fine_target = drift_target(fine.positions);
            for (std::size_t i = 0; i < n; ++i) {
                auto row = fine.positions.row(i);
                for (std::size_t j = 0; j < d; ++j) {
                    const double db =
                        std::sqrt(h_sub) *
                        gaussian_at(cfg.seed, Stream::euler_fine,
                                    static_cast<std::uint32_t>(k),
                                    static_cast<std::uint32_t>(i),
                                    (static_cast<std::uint32_t>(s) << 8) |
                                        static_cast<std::uint32_t>(j));
                    row[j] += h_sub * (fine_target[j] - row[j]) + noise_scale * db;
                    coarse_incr(i, j) += db;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto row = coarse.positions.row(i);
            for (std::size_t j = 0; j < d; ++j)
                row[j] += eta * (coarse_target[j] - row[j]) + noise_scale * coarse_incr(i, j);
        }
    }

    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        gap += sq_dist(fine.positions.row(i), coarse.positions.row(i));
    return gap / static_cast<double>(n);
}

}  // namespace cbo
