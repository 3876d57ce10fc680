#pragma once

#include <optional>
#include <vector>

#include "upr/phase_model.hpp"

namespace upr {

struct SpartaConfig {
    std::size_t s = 1;              // sparsity level
    double alpha = 1.0;             // step size
    double tau = 0.7;               // truncation threshold
    double init_card_frac = 1.0 / 6.0;  // fraction of measurements in I^0
    int power_iters = 100;
    bool one_over_m_scaling = true;
};

struct IrwfConfig {
    double alpha = 1.0;
    int power_iters = 100;
    bool one_over_m_scaling = true;
};

enum class SolverKind { Sparta, Irwf };

struct SolverTrace {
    std::vector<Vector> iterates;          // z^0 .. z^L
    std::vector<double> rel_mse_per_iter;  // filled when truth supplied
};

inline constexpr double kPowerTol = 1e-10;

/// Keep the s largest-magnitude entries (ties by lowest index), zero the rest.
Vector hard_threshold(const Vector& v, std::size_t s);

/// s candidate support indices; score(j) = (1/m) sum_i y_i^2 A[i,j]^2.
std::vector<std::size_t> sparta_support_estimate(const SensingMatrix& A,
                                                 const Measurements& y, std::size_t s);

/// Spectral init on the estimated support, scaled to sqrt(sum y^2 / m).
Vector sparta_init(const SensingMatrix& A, const Measurements& y, const SpartaConfig& cfg,
                   Rng& rng);

/// { i : |a_i^T z| >= y_i / (1 + tau) }.
std::vector<std::size_t> sparta_truncation_set(const SensingMatrix& A,
                                               const Measurements& y, const Vector& z,
                                               double tau);

/// Truncated amplitude-flow gradient over the given index set; 0/|0| taken as
/// 0. Scaled by 1/m when scale_by_m.
Vector sparta_gradient(const SensingMatrix& A, const Measurements& y, const Vector& z,
                       const std::vector<std::size_t>& iset, bool scale_by_m);

/// One full SPARTA step: truncation set from z, gradient descent, hard
/// threshold to s entries.
Vector sparta_step(const SensingMatrix& A, const Measurements& y, const Vector& z,
                   const SpartaConfig& cfg);

/// Scaled leading eigenvector of (1/m) sum_i y_i a_i a_i^T; scale is
/// sqrt(pi/2) * mean(y).
Vector irwf_init(const SensingMatrix& A, const Measurements& y, int power_iters, Rng& rng);

/// A^T (A z - y . sign(A z)); sign(0) = 0. Scaled by 1/m when scale_by_m.
Vector irwf_gradient(const SensingMatrix& A, const Measurements& y, const Vector& z,
                     bool scale_by_m);

Vector irwf_step(const SensingMatrix& A, const Measurements& y, const Vector& z,
                 const IrwfConfig& cfg);

struct BaselineConfig {
    SolverKind kind = SolverKind::Irwf;
    SpartaConfig sparta;
    IrwfConfig irwf;
};

/// L steps from the kind-specific initialization; rel_mse_per_iter filled when
/// truth is given.
SolverTrace run_baseline(const BaselineConfig& cfg, const SensingMatrix& A,
                         const Measurements& y, std::size_t L,
                         const std::optional<Vector>& truth, Rng& rng);

}  // namespace upr
