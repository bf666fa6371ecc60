#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbo/core.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

namespace cbo {

// Positive scalar carried as its natural log. The analysis constants contain
// e^{C alpha} factors that overflow binary64 even at alpha = 50, so arithmetic
// stays in log space; log_e = +inf flags a value whose log itself exceeds
// double range.
class LogScalar {
public:
    LogScalar() : log_e_(-std::numeric_limits<double>::infinity()) {}
    static LogScalar from_value(double v) {
        if (!(v >= 0.0)) throw std::invalid_argument("LogScalar: negative value");
        LogScalar s;
        s.log_e_ = (v == 0.0) ? -std::numeric_limits<double>::infinity() : std::log(v);
        return s;
    }
    static LogScalar from_log(double l) {
        LogScalar s;
        s.log_e_ = l;
        return s;
    }

    double log_e() const { return log_e_; }
    double log10() const { return log_e_ / std::numbers::ln10; }
    bool representable() const { return log_e_ < 709.0; }
    double value() const {
        if (log_e_ > 709.0) return std::numeric_limits<double>::infinity();
        return std::exp(log_e_);
    }

    friend LogScalar operator*(LogScalar a, LogScalar b) {
        return from_log(a.log_e_ + b.log_e_);
    }
    friend LogScalar operator/(LogScalar a, LogScalar b) {
        return from_log(a.log_e_ - b.log_e_);
    }
    // log-sum-exp addition
    friend LogScalar operator+(LogScalar a, LogScalar b) {
        if (a.log_e_ < b.log_e_) std::swap(a, b);
        if (std::isinf(a.log_e_)) return a;
        return from_log(a.log_e_ + std::log1p(std::exp(b.log_e_ - a.log_e_)));
    }
    LogScalar pow(double p) const { return from_log(log_e_ * p); }
    // e^x for x given as a LogScalar: finite only while x itself fits a double
    static LogScalar exp_of(LogScalar x) { return from_log(x.value()); }

private:
    double log_e_;
};

struct ConstantEntry {
    std::string name;
    double value = 0.0;   // +inf / 0 when not representable
    double log10 = 0.0;   // always meaningful (may be +-inf for over/underflow of the log)
    std::string note;
};

struct ConstantsReport {
    // headline constants, always representable at desk scale
    double c1 = 0.0;
    double C0 = 0.0;
    double T0_alpha = 0.0;
    double alpha0 = 0.0;
    double gamma0 = 0.0;
    double gamma_tilde0 = 0.0;
    double c2 = 0.0;
    double C4 = 0.0;
    double K0 = 0.0;
    double T1_int = 0.0;
    double L0_alpha = 0.0;
    double L1_alpha = 0.0;
    double C4_int = 0.0;
    double C9_int = 0.0;
    // exponential-in-alpha rows, kept in log space
    LogScalar C8_int, C1_int_at_T1, C2_int, C3_int, C5_int, C6_int_at_T1, C7_int,
        C10_int_at_T2, C11_int, C18_int, C19_int, C1_alpha, C2_alpha, C3_alpha, c3_alpha,
        T2_int_alpha;

    std::map<std::string, double> inputs_echo;
    std::vector<ConstantEntry> entries;

    const ConstantEntry& entry(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw std::invalid_argument("ConstantsReport: no entry named " + name);
    }
};

namespace detail {

// sup over r >= 0 of e^{-(kappa alpha / 2) r^beta} g(||x||), with
// ||x|| <= ||x*|| + r (g increasing), on {0} plus a log-spaced radial grid.
template <typename G>
double radial_sup(double kappa, double alpha, double beta, double x_star_norm, G&& g) {
    double best = g(x_star_norm);  // r = 0
    const int points = 200000;
    const double lo = std::log(1e-8), hi = std::log(1e4);
    for (int i = 0; i <= points; ++i) {
        const double r = std::exp(lo + (hi - lo) * i / points);
        const double v = std::exp(-0.5 * kappa * alpha * std::pow(r, beta)) *
                         g(x_star_norm + r);
        best = std::max(best, v);
    }
    return best;
}

inline double sup_f_on_origin_ball(const ObjectiveSpec& spec, double radius,
                                   std::uint64_t seed, std::string& method_note) {
    double best = -std::numeric_limits<double>::infinity();
    if (spec.dim == 1) {
        method_note = "dense 1d grid (200001 points)";
        const int points = 200000;
        for (int i = 0; i <= points; ++i) {
            const double x = -radius + 2.0 * radius * i / points;
            const Vec xv{x};
            best = std::max(best, spec.eval(xv));
        }
    } else if (spec.dim == 2) {
        method_note = "dense 2d grid (801x801, disk-filtered)";
        const int points = 800;
        Vec xv(2);
        for (int i = 0; i <= points; ++i) {
            xv[0] = -radius + 2.0 * radius * i / points;
            for (int j = 0; j <= points; ++j) {
                xv[1] = -radius + 2.0 * radius * j / points;
                if (xv[0] * xv[0] + xv[1] * xv[1] > radius * radius) continue;
                best = std::max(best, spec.eval(xv));
            }
        }
    } else {
        method_note = "random search (100000 seeded points)";
        const Vec origin(spec.dim, 0.0);
        for (int i = 0; i < 100000; ++i) {
            const Vec x = sample_in_ball(origin, radius, seed, static_cast<std::uint32_t>(i));
            best = std::max(best, spec.eval(x));
        }
    }
    return best;
}

}  // namespace detail

// Lipschitz bounds of h0(x) = x e^{-alpha f(x)} and h1(x) = e^{-alpha f(x)}:
//   L1 = e^{-alpha f*} sup e^{-(kappa alpha/2)||x-x*||^beta} L (1 + ||x||^a)
//   L0 = e^{-alpha f*} sup e^{-(kappa alpha/2)||x-x*||^beta} (1 + L||x|| + L||x||^{a+1})
// The sup is reduced to the radius r = ||x - x*|| with the conservative
// envelope ||x|| <= ||x*|| + r.
inline std::pair<double, double> lipschitz_bounds(const ObjectiveSpec& spec, double alpha) {
    const double s = norm(spec.x_star);
    const double scale = std::exp(-alpha * spec.f_star);
    const double L = spec.lip_L, a = spec.growth_a;
    const double l1 = detail::radial_sup(spec.kappa, alpha, spec.beta, s, [&](double xn) {
        return L * (1.0 + std::pow(xn, a));
    });
    const double l0 = detail::radial_sup(spec.kappa, alpha, spec.beta, s, [&](double xn) {
        return 1.0 + L * xn + L * std::pow(xn, a + 1.0);
    });
    return {scale * l0, scale * l1};
}

inline ConstantsReport table_constants(const ObjectiveSpec& spec, const CboConfig& cfg,
                                       double c_lap) {
    if (!(c_lap > 0.0)) throw std::invalid_argument("table_constants: c_lap must be > 0");
    if (!(spec.lambda > 0.0 && spec.kappa > 0.0 && spec.delta > 0.0 && spec.lip_L > 0.0))
        throw std::invalid_argument("table_constants: objective constants not populated");

    ConstantsReport rep;
    const double alpha = cfg.alpha, gamma = cfg.gamma, d = cfg.dim, eta0 = cfg.eta0,
                 zeta = cfg.zeta, sigma0_sq = cfg.sigma0_sq, R = cfg.clip_radius;
    const Vec m0 = cfg.initial_mean();
    const double lambda = spec.lambda, kappa = spec.kappa, delta = spec.delta,
                 beta = spec.beta;

    rep.inputs_echo = {{"alpha", alpha},     {"gamma", gamma},        {"d", d},
                       {"eta0", eta0},       {"zeta", zeta},          {"sigma0_sq", sigma0_sq},
                       {"R", R},             {"lambda", lambda},      {"kappa", kappa},
                       {"delta", delta},     {"beta", beta},          {"lip_L", spec.lip_L},
                       {"growth_a", spec.growth_a}, {"c_lap", c_lap}, {"n", double(cfg.n_particles)}};

    rep.c1 = 1.0 / (1.0 + 2.0 / (lambda * gamma));
    rep.C0 = 6.0 * gamma * d;
    rep.T0_alpha = 0.5 * std::log1p(std::max(0.0, 1.0 - 2.0 * alpha * sigma0_sq / gamma));
    rep.alpha0 = 2.0 * c_lap * c_lap / (rep.c1 * rep.c1 * gamma * d);

    const double e_x0_sq = sq_norm(m0) + d * sigma0_sq;
    const double drift_radius = R + std::sqrt(2.0 * d * gamma / rep.alpha0);
    rep.C4 = std::sqrt(std::max(
        e_x0_sq, drift_radius * drift_radius +
                     eta0 * (2.0 * d * gamma / rep.alpha0 + 2.0 * eta0 * drift_radius)));

    Vec m0_shift(m0.size());
    for (std::size_t j = 0; j < m0.size(); ++j) m0_shift[j] = m0[j] - spec.x_star[j];
    const double pow_delta = std::pow(delta, beta - 1.0);
    rep.gamma0 = 8.0 * std::max(R, norm(m0_shift)) / (kappa * pow_delta);
    rep.gamma_tilde0 = 8.0 * (R + rep.C4) / (kappa * pow_delta);

    rep.T1_int = std::log(72.0) / rep.c1;
    const bool zeta_one = zeta >= 1.0;
    if (zeta_one) {
        rep.K0 = std::numeric_limits<double>::infinity();
        rep.c2 = std::numeric_limits<double>::infinity();
        rep.C9_int = std::numeric_limits<double>::infinity();
    } else {
        rep.K0 = std::pow(2.0 + 2.0 * eta0 / ((1.0 - zeta) * rep.T1_int), 1.0 / (1.0 - zeta));
        rep.c2 = std::pow(2.0, eta0 / ((1.0 - zeta) * rep.T1_int)) - 1.0;
        const double w = rep.T1_int * (1.0 - zeta);
        const double expo = zeta / (1.0 - zeta);
        rep.C9_int =
            1.0 / std::min({std::pow(w, expo), w, std::pow(1.0 + w, expo) - 1.0});
    }

    const auto [l0, l1] = lipschitz_bounds(spec, alpha);
    rep.L0_alpha = l0;
    rep.L1_alpha = l1;

    std::string sup_method;
    const double sup_f =
        detail::sup_f_on_origin_ball(spec, 2.0 * rep.C4, cfg.seed, sup_method);

    using LS = LogScalar;
    const LS ls_R2 = LS::from_value(R * R);
    const LS ls_C4 = LS::from_value(rep.C4);
    const LS ls_L0 = LS::from_value(rep.L0_alpha);
    const LS ls_L1 = LS::from_value(rep.L1_alpha);

    rep.C8_int = LS::from_log(std::log(0.75) - alpha * sup_f);
    const LS inv_c8 = LS::from_value(1.0) / rep.C8_int;
    const LS inv_c8_sq = inv_c8 * inv_c8;

    // C2int = (16/C8^2)(2R^2 + C4^2 + (C4/C8)^2) + 8R^2 (1 + 12/C8^2)
    rep.C2_int = LS::from_value(16.0) * inv_c8_sq *
                     (LS::from_value(2.0) * ls_R2 + ls_C4.pow(2.0) +
                      ls_C4.pow(2.0) * inv_c8_sq) +
                 LS::from_value(8.0) * ls_R2 * (LS::from_value(1.0) +
                                                LS::from_value(12.0) * inv_c8_sq);

    // C3int = 2((L0 + 4 (C4/C8) L1)/C8)^2 + 16 R^2 L1^2 / C8^2
    const LS bracket = (ls_L0 + LS::from_value(4.0) * ls_C4 * inv_c8 * ls_L1) * inv_c8;
    rep.C3_int = LS::from_value(2.0) * bracket.pow(2.0) +
                 LS::from_value(16.0) * ls_R2 * ls_L1.pow(2.0) * inv_c8_sq;

    rep.C4_int = 5.0 * (2.0 * eta0 * (R * R + rep.C4 * rep.C4) + 2.0 * d * gamma / rep.alpha0);

    // C5int = 5((L0 + 4 L1 C4/C8)/(C8/2))^2 + 240 L1^2 R^2 / C8^2
    const LS bracket5 =
        (ls_L0 + LS::from_value(4.0) * ls_L1 * ls_C4 * inv_c8) * LS::from_value(2.0) * inv_c8;
    rep.C5_int = LS::from_value(5.0) * bracket5.pow(2.0) +
                 LS::from_value(240.0) * ls_L1.pow(2.0) * ls_R2 * inv_c8_sq;

    const LS exp_c3_t1 = LS::exp_of(rep.C3_int * LS::from_value(rep.T1_int));
    const LS exp_c5_t1 = LS::exp_of(rep.C5_int * LS::from_value(rep.T1_int));

    // C6int(T1) = R^2 C2int e^{C3int T1}(400 (L1/C8)^2 + 20 (L1/C4)^2)
    //             + 800 R^2 / C8^2 + 40 R^2
    rep.C6_int_at_T1 =
        ls_R2 * rep.C2_int * exp_c3_t1 *
            (LS::from_value(400.0) * (ls_L1 * inv_c8).pow(2.0) +
             LS::from_value(20.0) * (ls_L1 / ls_C4).pow(2.0)) +
        LS::from_value(800.0) * ls_R2 * inv_c8_sq + LS::from_value(40.0) * ls_R2;

    rep.C7_int = exp_c5_t1 * LS::from_value(rep.C4_int);
    rep.C18_int = rep.C7_int;  // identical printed expression; see notes
    rep.C1_int_at_T1 = LS::from_value(2.0) * rep.C6_int_at_T1 * exp_c5_t1 +
                       LS::from_value(2.0) * exp_c3_t1 * rep.C2_int;
    rep.C11_int = exp_c3_t1 * rep.C2_int + exp_c5_t1 * rep.C6_int_at_T1;
    rep.C2_alpha = LS::from_value(6.0) * rep.C11_int;

    // T2int = max(log(2)/2, (1/2) log(alpha 4 C4^2 (1/2 + 2 e^{C5 T1}) / C0))
    const LS inner = LS::from_value(4.0 * alpha * rep.C4 * rep.C4 / rep.C0) *
                     (LS::from_value(0.5) + LS::from_value(2.0) * exp_c5_t1);
    rep.T2_int_alpha = LS::from_log(
        std::log(std::max(0.5 * std::numbers::ln2, 0.5 * inner.log_e())));

    // C10int(T2) = C4int e^{C5 T2}(2 + 2^{zeta/(1-zeta)}(((1-zeta)T2/eta0)^{1/(1-zeta)} + 1))^zeta
    if (zeta_one) {
        rep.C10_int_at_T2 = LS::from_log(std::numeric_limits<double>::infinity());
        rep.C3_alpha = LS::from_log(std::numeric_limits<double>::infinity());
        rep.C1_alpha = LS::from_log(std::numeric_limits<double>::infinity());
    } else {
        const double expo = zeta / (1.0 - zeta);
        const LS t2_over = LS::from_value((1.0 - zeta) / eta0) * rep.T2_int_alpha;
        const LS inner10 =
            LS::from_value(2.0) +
            LS::from_value(std::pow(2.0, expo)) *
                (t2_over.pow(1.0 / (1.0 - zeta)) + LS::from_value(1.0));
        rep.C10_int_at_T2 = LS::from_value(rep.C4_int) *
                            LS::exp_of(rep.C5_int * rep.T2_int_alpha) * inner10.pow(zeta);

        // C3alpha = C7int eta0 C9int (eta0/(2(1-zeta)T1))^{-zeta/(1-zeta)} sum 2^{-l}(l+1)^{zeta/(1-zeta)}
        double series = 0.0;
        for (int l = 0; l < 200; ++l)
            series += std::pow(2.0, -l) * std::pow(l + 1.0, expo);
        rep.C3_alpha = rep.C7_int * LS::from_value(eta0) * LS::from_value(rep.C9_int) *
                       LS::from_value(
                           std::pow(eta0 / (2.0 * (1.0 - zeta) * rep.T1_int), -expo)) *
                       LS::from_value(series);

        // C1alpha = 2^{eta0/((1-zeta)T1) + 1}(3(C4^2 + C0/alpha0 + gamma d/alpha0) + C7int eta0)
        const LS lead = LS::from_value(
            std::pow(2.0, eta0 / ((1.0 - zeta) * rep.T1_int) + 1.0));
        rep.C1_alpha =
            lead * (LS::from_value(3.0 * (rep.C4 * rep.C4 + rep.C0 / rep.alpha0 +
                                          gamma * d / rep.alpha0)) +
                    rep.C7_int * LS::from_value(eta0));
    }

    // c3alpha = 1/(2(C3int + C5int + 1))
    rep.c3_alpha = LS::from_value(1.0) /
                   (LS::from_value(2.0) * (rep.C3_int + rep.C5_int + LS::from_value(1.0)));

    // C19int bounds sup u_{t,0} by the moment bound (C4 + ||x*||)^2.
    const double u0_bound = (rep.C4 + norm(spec.x_star)) * (rep.C4 + norm(spec.x_star));
    rep.C19_int = LS::from_value(u0_bound) + rep.C7_int * LS::from_value(eta0) +
                  rep.C2_alpha / LS::from_value(double(cfg.n_particles));

    const double v_d = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);

    const auto push = [&](const std::string& name, double value, double log10,
                          const std::string& note) {
        rep.entries.push_back({name, value, log10, note});
    };
    const auto push_plain = [&](const std::string& name, double v, const std::string& note) {
        push(name, v, std::log10(std::fabs(v) > 0 ? std::fabs(v) : 1e-300), note);
    };
    const auto push_log = [&](const std::string& name, const LogScalar& v,
                              const std::string& note) {
        push(name, v.value(), v.log10(), note);
    };

    push_plain("c1", rep.c1, "contraction rate 1/(1 + 2/(lambda gamma))");
    push_plain("C0", rep.C0, "plateau constant 6 gamma d");
    push_plain("T0_alpha", rep.T0_alpha, "warm-up time (1/2) log(1 + (1 - 2 alpha sigma0^2/gamma)^+)");
    push_plain("alpha0", rep.alpha0, "2 c_lap^2/(c1^2 gamma d); c_lap is an empirical input");
    push_plain("gamma0", rep.gamma0, "8 max(R, ||m0 - x*||)/(kappa delta^{beta-1})");
    push_plain("gamma_tilde0", rep.gamma_tilde0, "8 (R + C4)/(kappa delta^{beta-1})");
    push_plain("c2", rep.c2, zeta_one ? "undefined at zeta = 1" : "2^{eta0/((1-zeta)T1)} - 1");
    push_plain("C4", rep.C4, "second-moment bound of the clipped dynamics");
    push_plain("K0", rep.K0, zeta_one ? "undefined at zeta = 1" : "earliest valid iteration");
    push_plain("T1_int", rep.T1_int, "block length log(72)/c1");
    push_plain("L0_alpha", rep.L0_alpha, "radial-grid sup, conservative envelope ||x|| <= ||x*|| + r");
    push_plain("L1_alpha", rep.L1_alpha, "radial-grid sup, conservative envelope ||x|| <= ||x*|| + r");
    push_plain("C4_int", rep.C4_int, "discretization constant");
    push_plain("C9_int", rep.C9_int, zeta_one ? "undefined at zeta = 1" : "schedule constant");
    push_plain("V_d", v_d, "volume of the unit ball");
    push_log("C8_int", rep.C8_int, "(3/4) exp(-alpha sup f on B(0, 2 C4)); sup by " + sup_method);
    push_log("C1_int_at_T1", rep.C1_int_at_T1,
             "2 C6int(T1) e^{C5 T1} + 2 e^{C3 T1} C2int");
    push_log("C2_int", rep.C2_int, "chaos-gap numerator");
    push_log("C3_int", rep.C3_int, "chaos-gap growth exponent");
    push_log("C5_int", rep.C5_int, "discretization growth exponent");
    push_log("C6_int_at_T1", rep.C6_int_at_T1,
             "evaluated at T = T1_int; log overflows double when C3_int T1 does");
    push_log("C7_int", rep.C7_int,
             "printed table row e^{C5int T1} C4int; equals the in-proof C18int, which "
             "differs from the in-proof C7int definition (4 C18int + (1 + 4 e^{C5int "
             "T1}) C10int(T2int))");
    push_log("C10_int_at_T2", rep.C10_int_at_T2, "evaluated at T = T2int");
    push_log("C11_int", rep.C11_int, "e^{C3 T1} C2int + e^{C5 T1} C6int(T1)");
    push_log("C18_int", rep.C18_int, "in-proof definition e^{C5int T1} C4int");
    push_log("C19_int", rep.C19_int,
             "in-proof definition with sup u_{t,0} bounded by (C4 + ||x*||)^2");
    push_log("C1_alpha", rep.C1_alpha, "head constant of the block recursion");
    push_log("C2_alpha", rep.C2_alpha, "1/n coefficient, = 6 C11_int");
    push_log("C3_alpha", rep.C3_alpha, "step-size coefficient");
    push_log("c3_alpha", rep.c3_alpha, "chaos exponent 1/(2(C3int + C5int + 1))");
    push_log("T2_int_alpha", rep.T2_int_alpha, "max(log(2)/2, (1/2) log(...))");
    push_plain("C_Lap", c_lap, "empirical input; see the laplace sweep");
    return rep;
}

}  // namespace cbo
