#pragma once

#include <span>

#include "upr/unfolded.hpp"

namespace upr {

struct Dataset {
    std::vector<Vector> samples;
    std::size_t n = 0;
    std::size_t k = 0;  // k = n means dense
    std::uint64_t seed = 0;
};

struct TrainConfig {
    int epochs = 100;
    std::size_t batch_size = 64;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    TrainableMask mask;
    std::uint64_t seed = 0;
};

/// Gradients of the batch loss w.r.t. the trainable parameters; masked blocks
/// stay exactly zero.
struct GradBundle {
    std::vector<Vector> d_layers;  // dL/dw per layer
    Matrix d_A;

    static GradBundle zeros_like(const NetworkParams& params);
    void add(const GradBundle& other);
    void scale(double a);
};

struct AdamState {
    GradBundle m;  // first moments
    GradBundle v;  // second moments
    std::uint64_t t = 0;

    static AdamState zeros_like(const NetworkParams& params);
};

/// count signals of length n with exactly k nonzero standard-normal entries on
/// a uniformly random support; k = n means dense.
Dataset generate_dataset(std::size_t n, std::size_t k, std::size_t count,
                         std::uint64_t seed);

/// Per-sample loss D(x, forward(params, |A x|, z0)) with an explicit start
/// point. The spectral initialization is treated as a constant w.r.t. the
/// parameters, so gradcheck oracles must reuse the same z0.
double loss_sample(const NetworkParams& params, const Vector& x, const Vector& z0);

/// Reverse-mode gradients for one sample with frozen z0. Discrete choices
/// (signs, truncation sets, top-s support, the phase-distance branch) are
/// piecewise constant: no gradient flows through them.
double backward_sample(const NetworkParams& params, const Vector& x, const Vector& z0,
                       const TrainableMask& mask, GradBundle& grads);

/// Spectral initialization for each sample of a batch, substreamed per index.
std::vector<Vector> batch_inits(const NetworkParams& params, std::span<const Vector> batch,
                                Rng& rng);

/// Mean loss over the batch (initialization drawn from rng substreams).
double loss_batch(const NetworkParams& params, std::span<const Vector> batch, Rng& rng);

/// Mean loss and mean gradients over the batch. Per-sample passes run in
/// parallel; accumulation is an ordered fold so results are bit-stable.
double backward(const NetworkParams& params, std::span<const Vector> batch, Rng& rng,
                const TrainableMask& mask, GradBundle& grads);

/// Standard bias-corrected Adam update on the unmasked blocks.
void adam_step(NetworkParams& params, const GradBundle& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Minibatch epochs over a seed-shuffled dataset; deterministic per cfg.seed.
TrainResult train(const NetworkParams& params0, const Dataset& data,
                  const TrainConfig& cfg);

}  // namespace upr
