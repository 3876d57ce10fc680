#pragma once

#include "upr/numerics.hpp"

namespace upr {

/// m x n sensing matrix; rows are the sensing vectors.
struct SensingMatrix {
    Matrix A;

    std::size_t m() const { return A.rows; }
    std::size_t n() const { return A.cols; }
};

/// Magnitude measurements y = |A x|, entrywise nonnegative.
using Measurements = Vector;

/// y_i = |a_i^T x|.
Measurements encode(const SensingMatrix& A, const Vector& x);

/// Sign-invariant squared distance: min(||a - b||^2, ||a + b||^2).
double phase_distance(const Vector& a, const Vector& b);

/// phase_distance(est, truth) / ||truth||_2 (squared distance over unsquared
/// norm, as defined).
double relative_mse(const Vector& est, const Vector& truth);

/// Success iff rel_mse < 1e-5, strictly.
bool is_success(double rel_mse);

inline constexpr double kSuccessThreshold = 1e-5;

}  // namespace upr
