#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "cbo/core.hpp"

namespace cbo {

// Normalized softmin weights: entries >= 0, sum 1, at least one positive.
struct WeightVector {
    Vec w;
    std::size_t size() const { return w.size(); }
};

// Weights proportional to exp(-alpha * values). The minimum is subtracted
// before exponentiation, so the best particle always carries a pre-normalized
// weight of exactly 1 and the result depends only on value differences.
inline WeightVector softmin_weights(const Vec& values, double alpha) {
    if (values.empty()) throw std::invalid_argument("softmin_weights: empty input");
    if (!(alpha > 0.0)) throw std::invalid_argument("softmin_weights: alpha must be > 0");
    if (!all_finite(values)) throw std::invalid_argument("softmin_weights: non-finite value");

    double vmin = values[0];
    for (double v : values) vmin = std::min(vmin, v);

    WeightVector out;
    out.w.resize(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.w[i] = std::exp(-alpha * (values[i] - vmin));
        sum += out.w[i];
    }
    for (double& wi : out.w) wi /= sum;
    return out;
}

// Weighted particle average, summed in a fixed sequential order. Rounding can
// push the sum an ulp outside the hull; clamp per coordinate since the exact
// value lies inside.
inline Vec consensus_point(const Matrix& positions, const WeightVector& weights) {
    if (positions.rows() != weights.size())
        throw std::invalid_argument("consensus_point: row/weight count mismatch");
    const std::size_t n = positions.rows(), d = positions.cols();
    Vec theta(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = positions.row(i);
        const double wi = weights.w[i];
        for (std::size_t j = 0; j < d; ++j) theta[j] += wi * row[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
        double lo = positions(0, j), hi = positions(0, j);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, positions(i, j));
            hi = std::max(hi, positions(i, j));
        }
        theta[j] = std::clamp(theta[j], lo, hi);
    }
    return theta;
}

// Radial projection onto the closed ball of radius R; clip(0) := 0, the
// continuous extension at the origin.
inline Vec clip(std::span<const double> x, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("clip: R must be > 0");
    Vec out(x.begin(), x.end());
    const double n = norm(x);
    if (n > R) {
        const double scale = R / n;
        for (double& v : out) v *= scale;
    }
    return out;
}

struct BestParticle {
    std::size_t index = 0;
    Vec point;
    double value = 0.0;
};

// Minimal-value particle; ties resolved to the lowest index.
inline BestParticle global_best(const Matrix& positions, const Vec& values) {
    if (positions.rows() == 0) throw std::invalid_argument("global_best: empty system");
    if (positions.rows() != values.size())
        throw std::invalid_argument("global_best: row/value count mismatch");
    if (!all_finite(values)) throw std::invalid_argument("global_best: non-finite value");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best]) best = i;
    const auto row = positions.row(best);
    return {best, Vec(row.begin(), row.end()), values[best]};
}

// Weight-degeneracy diagnostic: (sum w)^2 / sum w^2, in [1, n].
inline double ess(const WeightVector& weights) {
    if (weights.w.empty()) throw std::invalid_argument("ess: empty weights");
    double s = 0.0, s2 = 0.0;
    for (double wi : weights.w) {
        s += wi;
        s2 += wi * wi;
    }
    return (s * s) / s2;
}

}  // namespace cbo
