#include "upr/unfolded.hpp"

#include <cmath>

namespace upr {

NetworkParams make_identity_params(std::size_t L, double alpha, SolverKind kind,
                                   SensingMatrix A, const SpartaConfig& sparta,
                                   const IrwfConfig& irwf) {
    if (alpha < 0.0) throw ArgumentError("make_identity_params: alpha < 0");
    NetworkParams p;
    p.kind = kind;
    p.A = std::move(A);
    p.sparta = sparta;
    p.irwf = irwf;
    p.layers.assign(L, LayerParams{Vector(p.A.n(), std::sqrt(alpha))});
    return p;
}

Vector upr_sparta_layer(const Vector& z, const SensingMatrix& A, const Measurements& y,
                        const LayerParams& lp, const SpartaConfig& cfg) {
    auto iset = sparta_truncation_set(A, y, z, cfg.tau);
    Vector g = sparta_gradient(A, y, z, iset, cfg.one_over_m_scaling);
    Vector v = z;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= lp.w[j] * lp.w[j] * g[j];
    return hard_threshold(v, cfg.s);
}

Vector upr_irwf_layer(const Vector& z, const SensingMatrix& A, const Measurements& y,
                      const LayerParams& lp, const IrwfConfig& cfg) {
    Vector g = irwf_gradient(A, y, z, cfg.one_over_m_scaling);
    Vector out = z;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= lp.w[j] * lp.w[j] * g[j];
    return out;
}

SolverTrace forward(const NetworkParams& params, const Measurements& y, const Vector& z0,
                    const std::optional<Vector>& truth) {
    if (z0.size() != params.n()) throw DimensionError("forward: z0 length != n");
    SolverTrace trace;
    Vector z = z0;
    trace.iterates.push_back(z);
    if (truth) trace.rel_mse_per_iter.push_back(relative_mse(z, *truth));
    for (const LayerParams& lp : params.layers) {
        z = (params.kind == SolverKind::Sparta)
                ? upr_sparta_layer(z, params.A, y, lp, params.sparta)
                : upr_irwf_layer(z, params.A, y, lp, params.irwf);
        trace.iterates.push_back(z);
        if (truth) trace.rel_mse_per_iter.push_back(relative_mse(z, *truth));
    }
    return trace;
}

Vector init_for(const NetworkParams& params, const Measurements& y, Rng& rng) {
    return (params.kind == SolverKind::Sparta)
               ? sparta_init(params.A, y, params.sparta, rng)
               : irwf_init(params.A, y, params.irwf.power_iters, rng);
}

}  // namespace upr
