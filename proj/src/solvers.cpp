#include "upr/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace upr {

Vector hard_threshold(const Vector& v, std::size_t s) {
    auto keep = top_k_indices(v, std::min(s, v.size()));
    Vector out(v.size(), 0.0);
    for (std::size_t j : keep) out[j] = v[j];
    return out;
}

std::vector<std::size_t> sparta_support_estimate(const SensingMatrix& A,
                                                 const Measurements& y, std::size_t s) {
    if (s > A.n()) throw ArgumentError("sparta_support_estimate: s > n");
    if (y.size() != A.m()) throw DimensionError("sparta_support_estimate: y length != m");
    const std::size_t m = A.m(), n = A.n();
    Vector score(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double yi2 = y[i] * y[i];
        const double* row = A.A.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) score[j] += yi2 * row[j] * row[j];
    }
    for (double& v : score) v /= static_cast<double>(m);
    return top_k_indices(score, s);
}

Vector sparta_init(const SensingMatrix& A, const Measurements& y, const SpartaConfig& cfg,
                   Rng& rng) {
    const std::size_t m = A.m(), n = A.n();
    if (y.size() != m) throw DimensionError("sparta_init: y length != m");

    double sum_y2 = 0.0;
    for (double v : y) sum_y2 += v * v;
    if (sum_y2 == 0.0) return Vector(n, 0.0);  // degenerate: nothing measured

    auto support = sparta_support_estimate(A, y, cfg.s);

    // I^0: indices of the ceil(init_card_frac * m) largest y_i
    std::size_t card = static_cast<std::size_t>(
        std::ceil(cfg.init_card_frac * static_cast<double>(m)));
    card = std::clamp<std::size_t>(card, 1, m);
    auto iset = top_k_indices(y, card);

    // Lambda = (1/|I^0|) sum_{i in I^0} a_{i,S} a_{i,S}^T / ||a_{i,S}||^2
    const std::size_t s = support.size();
    Matrix Lambda(s, s);
    for (std::size_t i : iset) {
        const double* row = A.A.data.data() + i * n;
        Vector a_s(s);
        double nrm2 = 0.0;
        for (std::size_t k = 0; k < s; ++k) {
            a_s[k] = row[support[k]];
            nrm2 += a_s[k] * a_s[k];
        }
        if (nrm2 == 0.0) continue;
        for (std::size_t r = 0; r < s; ++r)
            for (std::size_t c = 0; c < s; ++c) Lambda(r, c) += a_s[r] * a_s[c] / nrm2;
    }
    for (double& v : Lambda.data) v /= static_cast<double>(iset.size());

    Rng sub = rng.substream("sparta-init-power");
    auto [v_s, lambda] = power_iteration(Lambda, cfg.power_iters, kPowerTol, sub);
    (void)lambda;

    Vector z0(n, 0.0);
    for (std::size_t k = 0; k < s; ++k) z0[support[k]] = v_s[k];
    double scale = std::sqrt(sum_y2 / static_cast<double>(m));
    for (double& v : z0) v *= scale;
    return z0;
}

std::vector<std::size_t> sparta_truncation_set(const SensingMatrix& A,
                                               const Measurements& y, const Vector& z,
                                               double tau) {
    Vector p = matvec(A.A, z);
    std::vector<std::size_t> iset;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) >= y[i] / (1.0 + tau)) iset.push_back(i);
    return iset;
}

Vector sparta_gradient(const SensingMatrix& A, const Measurements& y, const Vector& z,
                       const std::vector<std::size_t>& iset, bool scale_by_m) {
    const std::size_t m = A.m(), n = A.n();
    if (y.size() != m || z.size() != n) throw DimensionError("sparta_gradient: shape mismatch");
    Vector p = matvec(A.A, z);
    Vector g(n, 0.0);
    for (std::size_t i : iset) {
        double pi = p[i];
        double u = (pi == 0.0) ? 0.0 : pi - y[i] * (pi / std::abs(pi));
        const double* row = A.A.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) g[j] += u * row[j];
    }
    if (scale_by_m)
        for (double& v : g) v /= static_cast<double>(m);
    return g;
}

Vector sparta_step(const SensingMatrix& A, const Measurements& y, const Vector& z,
                   const SpartaConfig& cfg) {
    auto iset = sparta_truncation_set(A, y, z, cfg.tau);
    Vector g = sparta_gradient(A, y, z, iset, cfg.one_over_m_scaling);
    Vector v = z;
    axpy(-cfg.alpha, g, v);
    return hard_threshold(v, cfg.s);
}

Vector irwf_init(const SensingMatrix& A, const Measurements& y, int power_iters,
                 Rng& rng) {
    const std::size_t m = A.m(), n = A.n();
    if (y.size() != m) throw DimensionError("irwf_init: y length != m");
    double sum_y = 0.0;
    for (double v : y) sum_y += v;
    if (sum_y == 0.0) return Vector(n, 0.0);  // degenerate

    // Y = (1/m) sum_i y_i a_i a_i^T
    Matrix Y(n, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = A.A.data.data() + i * n;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) Y(r, c) += y[i] * row[r] * row[c];
    }
    for (double& v : Y.data) v /= static_cast<double>(m);

    Rng sub = rng.substream("irwf-init-power");
    auto [v, lambda] = power_iteration(Y, power_iters, kPowerTol, sub);
    (void)lambda;

    double scale = std::sqrt(M_PI / 2.0) * (sum_y / static_cast<double>(m));
    for (double& x : v) x *= scale;
    return v;
}

Vector irwf_gradient(const SensingMatrix& A, const Measurements& y, const Vector& z,
                     bool scale_by_m) {
    const std::size_t m = A.m();
    if (y.size() != m || z.size() != A.n()) throw DimensionError("irwf_gradient: shape mismatch");
    Vector p = matvec(A.A, z);
    Vector r(m);
    for (std::size_t i = 0; i < m; ++i) {
        double sgn = (p[i] > 0.0) - (p[i] < 0.0);
        r[i] = p[i] - y[i] * sgn;
    }
    Vector g = matvec_t(A.A, r);
    if (scale_by_m)
        for (double& v : g) v /= static_cast<double>(m);
    return g;
}

Vector irwf_step(const SensingMatrix& A, const Measurements& y, const Vector& z,
                 const IrwfConfig& cfg) {
    Vector g = irwf_gradient(A, y, z, cfg.one_over_m_scaling);
    Vector out = z;
    axpy(-cfg.alpha, g, out);
    return out;
}

SolverTrace run_baseline(const BaselineConfig& cfg, const SensingMatrix& A,
                         const Measurements& y, std::size_t L,
                         const std::optional<Vector>& truth, Rng& rng) {
    SolverTrace trace;
    Vector z = (cfg.kind == SolverKind::Sparta)
                   ? sparta_init(A, y, cfg.sparta, rng)
                   : irwf_init(A, y, cfg.irwf.power_iters, rng);
    trace.iterates.push_back(z);
    if (truth) trace.rel_mse_per_iter.push_back(relative_mse(z, *truth));
    for (std::size_t l = 0; l < L; ++l) {
        z = (cfg.kind == SolverKind::Sparta) ? sparta_step(A, y, z, cfg.sparta)
                                             : irwf_step(A, y, z, cfg.irwf);
        trace.iterates.push_back(z);
        if (truth) trace.rel_mse_per_iter.push_back(relative_mse(z, *truth));
    }
    return trace;
}

}  // namespace upr
