#pragma once

#include <cmath>
#include <stdexcept>

namespace cbo {

// eta_k = eta0 / k^zeta, k >= 1.
inline double step_size(long k, double eta0, double zeta) {
    if (k < 1) throw std::invalid_argument("step_size: k must be >= 1");
    return eta0 * std::pow(static_cast<double>(k), -zeta);
}

// t_k = sum_{l=1..k} eta_l, by direct summation.
inline double elapsed_time(long k, double eta0, double zeta) {
    if (k < 0) throw std::invalid_argument("elapsed_time: k must be >= 0");
    double t = 0.0;
    for (long l = 1; l <= k; ++l) t += step_size(l, eta0, zeta);
    return t;
}

// k_t = inf{ k : t_k >= t }. The schedule diverges for zeta <= 1, so the scan
// terminates.
inline long first_index_reaching(double t, double eta0, double zeta) {
    if (t < 0.0) throw std::invalid_argument("first_index_reaching: t must be >= 0");
    if (zeta > 1.0)
        throw std::invalid_argument("first_index_reaching: zeta > 1 gives a convergent schedule");
    double acc = 0.0;
    long k = 0;
    while (acc < t) {
        ++k;
        acc += step_size(k, eta0, zeta);
    }
    return k;
}

}  // namespace cbo
