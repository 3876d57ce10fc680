#pragma once

#include "upr/solvers.hpp"

namespace upr {

/// Diagonal preconditioner factor: G^i = diag(w)^2, PSD for any real w.
struct LayerParams {
    Vector w;
};

struct NetworkParams {
    SolverKind kind = SolverKind::Irwf;
    std::vector<LayerParams> layers;
    SensingMatrix A;
    SpartaConfig sparta;
    IrwfConfig irwf;

    std::size_t depth() const { return layers.size(); }
    std::size_t n() const { return A.n(); }
    std::size_t m() const { return A.m(); }
};

struct TrainableMask {
    bool train_A = false;
    bool train_layers = true;
};

/// Every layer gets w = sqrt(alpha) per entry, so G^i = alpha * I and the
/// network reproduces the fixed-step baseline.
NetworkParams make_identity_params(std::size_t L, double alpha, SolverKind kind,
                                   SensingMatrix A, const SpartaConfig& sparta,
                                   const IrwfConfig& irwf);

/// One UPR-SPARTA layer: truncation set from z, preconditioned truncated
/// gradient, hard threshold to s entries.
Vector upr_sparta_layer(const Vector& z, const SensingMatrix& A, const Measurements& y,
                        const LayerParams& lp, const SpartaConfig& cfg);

/// One UPR-IRWF layer: z - diag(w^2) * irwf_gradient(A, y, z).
Vector upr_irwf_layer(const Vector& z, const SensingMatrix& A, const Measurements& y,
                      const LayerParams& lp, const IrwfConfig& cfg);

/// Apply layers 0..L-1 in order; returns the final estimate inside the trace.
SolverTrace forward(const NetworkParams& params, const Measurements& y, const Vector& z0,
                    const std::optional<Vector>& truth = std::nullopt);

/// Kind-specific spectral initialization.
Vector init_for(const NetworkParams& params, const Measurements& y, Rng& rng);

}  // namespace upr
