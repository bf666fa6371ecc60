#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbo/consensus.hpp"
#include "cbo/core.hpp"
#include "cbo/metrics_basic.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"
#include "cbo/schedule.hpp"

namespace cbo {

struct CboConfig {
    int dim = 1;
    int n_particles = 100;
    double alpha = 100.0;
    double gamma = 4.0;
    double clip_radius = 2.0;
    double eta0 = 1.0;
    double zeta = 0.5;
    double sigma0_sq = 0.04;
    Vec m0;  // initial mean; defaults to the origin when empty
    std::uint64_t seed = 1;
    long max_iter = 1000;
    // Test hook: replaces the sqrt(2 gamma / alpha) noise factor when set.
    std::optional<double> noise_scale_override;

    Vec initial_mean() const {
        return m0.empty() ? Vec(static_cast<std::size_t>(dim), 0.0) : m0;
    }
};

inline void validate(const CboConfig& cfg) {
    if (cfg.dim < 1) throw std::invalid_argument("config: dim must be >= 1");
    if (cfg.n_particles < 1) throw std::invalid_argument("config: n_particles must be >= 1");
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("config: alpha must be > 0");
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
    if (!(cfg.clip_radius > 0.0)) throw std::invalid_argument("config: clip_radius must be > 0");
    if (!(cfg.eta0 > 0.0 && cfg.eta0 <= 1.0))
        throw std::invalid_argument("config: eta0 must be in (0, 1]");
    if (!(cfg.zeta > 0.0 && cfg.zeta <= 1.0))
        throw std::invalid_argument("config: zeta must be in (0, 1]");
    if (cfg.sigma0_sq < 0.0) throw std::invalid_argument("config: sigma0_sq must be >= 0");
    if (cfg.max_iter < 0) throw std::invalid_argument("config: max_iter must be >= 0");
    if (!cfg.m0.empty() && static_cast<int>(cfg.m0.size()) != cfg.dim)
        throw std::invalid_argument("config: m0 length does not match dim");
}

// Legal-but-flagged settings. The convergence guarantees assume
// sigma0^2 >= gamma/(2 alpha) and R >= ||x*|| + delta.
inline std::vector<std::string> config_warnings(const CboConfig& cfg,
                                                const ObjectiveSpec& spec) {
    std::vector<std::string> notes;
    if (cfg.sigma0_sq < cfg.gamma / (2.0 * cfg.alpha))
        notes.push_back("sigma0_sq below gamma/(2 alpha): initial variance outside the guaranteed regime");
    if (cfg.clip_radius < norm(spec.x_star) + spec.delta)
        notes.push_back("clip_radius below ||x_star|| + delta: clipping may bind near the minimizer");
    return notes;
}

struct ParticleSystem {
    Matrix positions;  // n x d
    long step = 0;
    std::uint64_t seed = 0;
    // Noise-stream labels, normally the identity; tests permute them together
    // with the rows to probe exchangeability.
    std::vector<std::uint32_t> stream_ids;
};

inline ParticleSystem init_particles(const CboConfig& cfg) {
    validate(cfg);
    const std::size_t n = cfg.n_particles, d = cfg.dim;
    const Vec mean = cfg.initial_mean();
    const double sd = std::sqrt(cfg.sigma0_sq);
    ParticleSystem sys;
    sys.positions = Matrix(n, d);
    sys.seed = cfg.seed;
    sys.stream_ids.resize(n);
    std::iota(sys.stream_ids.begin(), sys.stream_ids.end(), 0u);
    parallel_for(n, [&](std::size_t i) {
        auto row = sys.positions.row(i);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = mean[j] + sd * gaussian_at(cfg.seed, Stream::init_positions, 0,
                                                static_cast<std::uint32_t>(i),
                                                static_cast<std::uint32_t>(j));
    });
    return sys;
}

// One update of the clipped consensus dynamics:
//   X_{k+1} = X_k + eta_{k+1} (clip_R(theta_k) - X_k) + sqrt(2 eta_{k+1} gamma/alpha) xi.
// theta_k is computed from the state before the move; xi is addressed by
// (seed, k+1, stream id, coordinate).
inline void cbo_step(ParticleSystem& sys, const CboConfig& cfg, const ObjectiveSpec& spec) {
    const std::size_t n = sys.positions.rows(), d = sys.positions.cols();
    const Vec values = evaluate_batch(spec, sys.positions);
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(values[i]))
            throw std::runtime_error("cbo_step: non-finite objective value at particle " +
                                     std::to_string(i));

    const WeightVector weights = softmin_weights(values, cfg.alpha);
    const Vec theta = consensus_point(sys.positions, weights);
    const Vec target = clip(theta, cfg.clip_radius);

    const long k_next = sys.step + 1;
    const double eta = step_size(k_next, cfg.eta0, cfg.zeta);
    const double noise_scale = cfg.noise_scale_override
                                   ? *cfg.noise_scale_override
                                   : std::sqrt(2.0 * cfg.gamma / cfg.alpha);
    const double noise = std::sqrt(eta) * noise_scale;

    parallel_for(n, [&](std::size_t i) {
        auto row = sys.positions.row(i);
        const std::uint32_t stream = sys.stream_ids[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double xi = gaussian_at(sys.seed, Stream::step_noise,
                                          static_cast<std::uint32_t>(k_next), stream,
                                          static_cast<std::uint32_t>(j));
            row[j] += eta * (target[j] - row[j]) + noise * xi;
        }
    });
    sys.step = k_next;

    if (!all_finite(sys.positions.flat()))
        throw std::runtime_error("cbo_step: non-finite particle position after step " +
                                 std::to_string(k_next));
}

struct RunRow {
    long k = 0;
    double eta = 0.0;  // step size used to reach this state (0 for the initial row)
    double t = 0.0;
    double mse = 0.0;
    double best_value = 0.0;
    long best_index = 0;
    Vec theta;
    Vec theta_clipped;
    double ess = 0.0;
    double best_dist_sq = 0.0;  // min_i ||X_i - x*||^2, kept for the best-particle studies
};

struct RunRecord {
    std::vector<RunRow> rows;
    CboConfig config;
    std::string objective;
};

namespace detail {

inline RunRow snapshot(const ParticleSystem& sys, const CboConfig& cfg,
                       const ObjectiveSpec& spec, double eta, double t) {
    const Vec values = evaluate_batch(spec, sys.positions);
    const WeightVector weights = softmin_weights(values, cfg.alpha);
    const BestParticle best = global_best(sys.positions, values);
    RunRow row;
    row.k = sys.step;
    row.eta = eta;
    row.t = t;
    row.mse = mse_to_minimizer(sys.positions, spec.x_star);
    row.best_value = best.value;
    row.best_index = static_cast<long>(best.index);
    row.theta = consensus_point(sys.positions, weights);
    row.theta_clipped = clip(row.theta, cfg.clip_radius);
    row.ess = ess(weights);
    row.best_dist_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sys.positions.rows(); ++i)
        row.best_dist_sq = std::min(row.best_dist_sq, sq_dist(sys.positions.row(i), spec.x_star));
    return row;
}

}  // namespace detail

// Runs max_iter steps, recording the initial state, every record_every-th
// iteration, and the final one. Pure function of (cfg, spec).
inline RunRecord run_cbo(const CboConfig& cfg, const ObjectiveSpec& spec, long record_every) {
    validate(cfg);
    if (record_every < 1) throw std::invalid_argument("run_cbo: record_every must be >= 1");
    if (spec.dim != cfg.dim) throw std::invalid_argument("run_cbo: objective dim != config dim");

    RunRecord record;
    record.config = cfg;
    record.objective = spec.name;

    ParticleSystem sys = init_particles(cfg);
    double t = 0.0;
    record.rows.push_back(detail::snapshot(sys, cfg, spec, 0.0, 0.0));
    for (long k = 1; k <= cfg.max_iter; ++k) {
        cbo_step(sys, cfg, spec);
        const double eta = step_size(k, cfg.eta0, cfg.zeta);
        t += eta;
        if (k % record_every == 0 || k == cfg.max_iter)
            record.rows.push_back(detail::snapshot(sys, cfg, spec, eta, t));
    }
    return record;
}

}  // namespace cbo
