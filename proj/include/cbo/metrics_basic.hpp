#pragma once

#include <stdexcept>

#include "cbo/core.hpp"

namespace cbo {

// (1/n) sum_i ||X_i - x*||^2.
inline double mse_to_minimizer(const Matrix& positions, std::span<const double> x_star) {
    if (positions.rows() == 0) throw std::invalid_argument("mse_to_minimizer: empty system");
    if (positions.cols() != x_star.size())
        throw std::invalid_argument("mse_to_minimizer: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < positions.rows(); ++i) s += sq_dist(positions.row(i), x_star);
    return s / static_cast<double>(positions.rows());
}

}  // namespace cbo
