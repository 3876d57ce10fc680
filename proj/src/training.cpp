#include "upr/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace upr {

GradBundle GradBundle::zeros_like(const NetworkParams& params) {
    GradBundle g;
    g.d_layers.assign(params.depth(), Vector(params.n(), 0.0));
    g.d_A = Matrix(params.m(), params.n());
    return g;
}

void GradBundle::add(const GradBundle& other) {
    for (std::size_t l = 0; l < d_layers.size(); ++l)
        for (std::size_t j = 0; j < d_layers[l].size(); ++j)
            d_layers[l][j] += other.d_layers[l][j];
    for (std::size_t i = 0; i < d_A.data.size(); ++i) d_A.data[i] += other.d_A.data[i];
}

void GradBundle::scale(double a) {
    for (auto& dl : d_layers)
        for (double& v : dl) v *= a;
    for (double& v : d_A.data) v *= a;
}

AdamState AdamState::zeros_like(const NetworkParams& params) {
    AdamState s;
    s.m = GradBundle::zeros_like(params);
    s.v = GradBundle::zeros_like(params);
    return s;
}

Dataset generate_dataset(std::size_t n, std::size_t k, std::size_t count,
                         std::uint64_t seed) {
    if (k < 1 || k > n) throw ArgumentError("generate_dataset: k out of [1, n]");
    if (count < 1) throw ArgumentError("generate_dataset: count < 1");
    Dataset ds;
    ds.n = n;
    ds.k = k;
    ds.seed = seed;
    ds.samples.reserve(count);
    Rng root(seed);
    for (std::size_t s = 0; s < count; ++s) {
        Rng rng = root.substream(s);
        Vector x(n, 0.0);
        if (k == n) {
            for (double& v : x) v = rng.next_gaussian();
        } else {
            // uniform random support via partial Fisher-Yates
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            for (std::size_t j = 0; j < k; ++j) {
                std::size_t r = j + static_cast<std::size_t>(rng.next_u64() % (n - j));
                std::swap(idx[j], idx[r]);
            }
            for (std::size_t j = 0; j < k; ++j) x[idx[j]] = rng.next_gaussian();
        }
        ds.samples.push_back(std::move(x));
    }
    return ds;
}

namespace {

inline double sign0(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// dD/d(est) through the selected branch of min(||e-x||^2, ||e+x||^2)
void phase_distance_backward(const Vector& est, const Vector& x, Vector& dest,
                             double& loss) {
    double dm = 0.0, dp = 0.0;
    for (std::size_t j = 0; j < est.size(); ++j) {
        double a = est[j] - x[j], b = est[j] + x[j];
        dm += a * a;
        dp += b * b;
    }
    dest.resize(est.size());
    if (dm <= dp) {
        loss = dm;
        for (std::size_t j = 0; j < est.size(); ++j) dest[j] = 2.0 * (est[j] - x[j]);
    } else {
        loss = dp;
        for (std::size_t j = 0; j < est.size(); ++j) dest[j] = 2.0 * (est[j] + x[j]);
    }
}

struct LayerTape {
    Vector z;      // layer input
    Vector p;      // A z
    Vector resid;  // masked amplitude residual (m); zero outside the truncation set
    Vector grad;   // preconditioner input g or u (n)
    std::vector<char> in_set;  // SPARTA truncation membership (m)
    std::vector<char> kept;    // SPARTA top-s support of the output (n)
};

}  // namespace

double loss_sample(const NetworkParams& params, const Vector& x, const Vector& z0) {
    Measurements y = encode(params.A, x);
    SolverTrace tr = forward(params, y, z0);
    return phase_distance(tr.iterates.back(), x);
}

double backward_sample(const NetworkParams& params, const Vector& x, const Vector& z0,
                       const TrainableMask& mask, GradBundle& grads) {
    const std::size_t m = params.m(), n = params.n(), L = params.depth();
    const bool sparta = params.kind == SolverKind::Sparta;
    const bool scale =
        sparta ? params.sparta.one_over_m_scaling : params.irwf.one_over_m_scaling;
    const double c = scale ? 1.0 / static_cast<double>(m) : 1.0;

    Vector Ax = matvec(params.A.A, x);
    Measurements y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = std::abs(Ax[i]);

    // ---- forward with tape ----
    std::vector<LayerTape> tape(L);
    Vector z = z0;
    for (std::size_t l = 0; l < L; ++l) {
        LayerTape& t = tape[l];
        t.z = z;
        t.p = matvec(params.A.A, z);
        t.resid.assign(m, 0.0);
        if (sparta) {
            t.in_set.assign(m, 0);
            double thr = 1.0 + params.sparta.tau;
            for (std::size_t i = 0; i < m; ++i)
                if (std::abs(t.p[i]) >= y[i] / thr) {
                    t.in_set[i] = 1;
                    t.resid[i] = t.p[i] - y[i] * sign0(t.p[i]);
                }
        } else {
            for (std::size_t i = 0; i < m; ++i)
                t.resid[i] = t.p[i] - y[i] * sign0(t.p[i]);
        }
        t.grad = matvec_t(params.A.A, t.resid);
        if (scale)  // divide, to stay bit-identical with the primal path
            for (double& v : t.grad) v /= static_cast<double>(m);

        const Vector& w = params.layers[l].w;
        Vector v = z;
        for (std::size_t j = 0; j < n; ++j) v[j] -= w[j] * w[j] * t.grad[j];
        if (sparta) {
            auto keep = top_k_indices(v, std::min(params.sparta.s, n));
            t.kept.assign(n, 0);
            Vector out(n, 0.0);
            for (std::size_t j : keep) {
                t.kept[j] = 1;
                out[j] = v[j];
            }
            z = std::move(out);
        } else {
            z = std::move(v);
        }
    }

    // ---- loss and reverse sweep ----
    double loss;
    Vector zbar;
    phase_distance_backward(z, x, zbar, loss);

    Vector ybar(m, 0.0);
    Vector ubar(n), pbar(m), tmp(n);
    for (std::size_t l = L; l-- > 0;) {
        const LayerTape& t = tape[l];
        const Vector& w = params.layers[l].w;

        // straight-through on kept coordinates, zero on dropped
        Vector vbar = zbar;
        if (sparta)
            for (std::size_t j = 0; j < n; ++j)
                if (!t.kept[j]) vbar[j] = 0.0;

        if (mask.train_layers)
            for (std::size_t j = 0; j < n; ++j)
                grads.d_layers[l][j] += -2.0 * w[j] * t.grad[j] * vbar[j];

        // ubar = d loss / d (preconditioner input)
        for (std::size_t j = 0; j < n; ++j) ubar[j] = -w[j] * w[j] * vbar[j];

        // grad = c * A^T resid
        matvec(params.A.A, ubar, pbar);  // reuse: A ubar, length m
        for (std::size_t i = 0; i < m; ++i) {
            double rbar = c * pbar[i];
            if (sparta && !t.in_set[i]) rbar = 0.0;
            pbar[i] = rbar;                      // resid = p - y.sign(p), sign frozen
            ybar[i] += -sign0(t.p[i]) * rbar;
        }
        if (mask.train_A) {
            // dA += c * resid ubar^T + pbar z^T
            for (std::size_t i = 0; i < m; ++i) {
                double ri = c * t.resid[i];
                double pi = pbar[i];
                if (ri == 0.0 && pi == 0.0) continue;
                double* row = grads.d_A.data.data() + i * n;
                for (std::size_t j = 0; j < n; ++j) row[j] += ri * ubar[j] + pi * t.z[j];
            }
        }
        // zbar_prev = vbar + A^T pbar
        matvec_t(params.A.A, pbar, tmp);
        for (std::size_t j = 0; j < n; ++j) zbar[j] = vbar[j] + tmp[j];
    }

    // encoder: y = |A x|, d|u|/du = sign(u)
    if (mask.train_A) {
        for (std::size_t i = 0; i < m; ++i) {
            double g = ybar[i] * sign0(Ax[i]);
            if (g == 0.0) continue;
            double* row = grads.d_A.data.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += g * x[j];
        }
    }
    return loss;
}

std::vector<Vector> batch_inits(const NetworkParams& params, std::span<const Vector> batch,
                                Rng& rng) {
    std::vector<Vector> z0s(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        Measurements y = encode(params.A, batch[b]);
        Rng sub = rng.substream("init", b);
        z0s[b] = init_for(params, y, sub);
    }
    return z0s;
}

double loss_batch(const NetworkParams& params, std::span<const Vector> batch, Rng& rng) {
    if (batch.empty()) throw ArgumentError("loss_batch: empty batch");
    auto z0s = batch_inits(params, batch, rng);
    const std::int64_t B = static_cast<std::int64_t>(batch.size());
    std::vector<double> losses(batch.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < B; ++b)
        losses[b] = loss_sample(params, batch[b], z0s[b]);
    double total = 0.0;
    for (double v : losses) total += v;  // ordered fold
    return total / static_cast<double>(batch.size());
}

double backward(const NetworkParams& params, std::span<const Vector> batch, Rng& rng,
                const TrainableMask& mask, GradBundle& grads) {
    if (batch.empty()) throw ArgumentError("backward: empty batch");
    auto z0s = batch_inits(params, batch, rng);
    const std::int64_t B = static_cast<std::int64_t>(batch.size());
    std::vector<double> losses(batch.size());
    std::vector<GradBundle> partials(batch.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < B; ++b) {
        partials[b] = GradBundle::zeros_like(params);
        losses[b] = backward_sample(params, batch[b], z0s[b], mask, partials[b]);
    }
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {  // ordered fold
        total += losses[b];
        grads.add(partials[b]);
    }
    grads.scale(1.0 / static_cast<double>(batch.size()));
    return total / static_cast<double>(batch.size());
}

namespace {

void adam_update_block(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m1, std::vector<double>& m2,
                       const TrainConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * g[i];
        m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        double mhat = m1[i] / bc1;
        double vhat = m2[i] / bc2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

}  // namespace

void adam_step(NetworkParams& params, const GradBundle& grads, AdamState& state,
               const TrainConfig& cfg) {
    state.t += 1;
    double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    if (cfg.mask.train_layers)
        for (std::size_t l = 0; l < params.depth(); ++l)
            adam_update_block(params.layers[l].w, grads.d_layers[l], state.m.d_layers[l],
                              state.v.d_layers[l], cfg, bc1, bc2);
    if (cfg.mask.train_A)
        adam_update_block(params.A.A.data, grads.d_A.data, state.m.d_A.data,
                          state.v.d_A.data, cfg, bc1, bc2);
}

TrainResult train(const NetworkParams& params0, const Dataset& data,
                  const TrainConfig& cfg) {
    if (!cfg.mask.train_A && !cfg.mask.train_layers)
        throw ArgumentError("train: nothing trainable");
    if (cfg.batch_size < 1 || cfg.batch_size > data.samples.size())
        throw ArgumentError("train: bad batch_size");

    TrainResult result{params0, {}};
    AdamState state = AdamState::zeros_like(params0);
    Rng root(cfg.seed);
    std::vector<std::size_t> order(data.samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng = root.substream("shuffle", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);

        double epoch_loss = 0.0;
        std::size_t seen = 0, batch_idx = 0;
        std::vector<Vector> batch;
        for (std::size_t off = 0; off < order.size(); off += cfg.batch_size, ++batch_idx) {
            std::size_t end = std::min(off + cfg.batch_size, order.size());
            batch.clear();
            for (std::size_t i = off; i < end; ++i) batch.push_back(data.samples[order[i]]);

            Rng batch_rng = root.substream("batch", static_cast<std::uint64_t>(epoch),
                                           static_cast<std::uint64_t>(batch_idx));
            GradBundle grads = GradBundle::zeros_like(result.params);
            double loss = backward(result.params, batch, batch_rng, cfg.mask, grads);
            adam_step(result.params, grads, state, cfg);
            epoch_loss += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(seen));
    }
    return result;
}

}  // namespace upr
