#pragma once

#include <optional>
#include <string>

#include "upr/checkpoint.hpp"
#include "upr/training.hpp"

namespace upr {

enum class ExperimentKind { EsrSweep, SparsitySweep, LayerTrace, Train, GradCheck };

/// Cases 1-4: baseline / learned A / learned preconditioners / both.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::EsrSweep;
    SolverKind solver = SolverKind::Irwf;
    int case_label = 1;

    std::size_t n = 100;
    std::size_t k = 5;        // sparsity of the signals (k = n means dense)
    std::size_t m = 0;        // fixed m (layer_trace, train)
    std::vector<double> m_over_n_grid;  // esr_sweep
    std::vector<std::size_t> k_grid;    // sparsity_sweep
    std::size_t L = 20;
    std::size_t trials = 100;
    std::size_t train_size = 2048;
    std::size_t test_size = 2048;
    std::uint64_t seed = 0;

    SpartaConfig sparta;
    IrwfConfig irwf;
    TrainConfig train;

    std::string checkpoint_dir;  // learned cases load from here when nonempty
    std::string output;

    std::vector<std::string> keys_set;  // keys the config file set explicitly
};

/// Strict flat key=value parser; unknown or malformed keys are errors naming
/// the key and line.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Presets: `paper` reproduces the reference settings (n=100, k=5, L=20
/// SPARTA / L=50 IRWF, 2048/2048 datasets, 100 epochs, lr 1e-4); `desk`
/// halves the dimensions for quick runs. Applied before the config file, so
/// file keys win.
void apply_preset(ExperimentConfig& cfg, const std::string& preset);

struct Curve {
    std::vector<double> x;           // m/n, k, or layer index
    std::vector<double> y;           // esr or median relative MSE
    std::vector<double> q25, q75;    // trace curves only
    std::vector<int> case_labels;    // per row
    std::size_t trials = 0;
    SolverKind solver = SolverKind::Irwf;
    std::uint64_t seed = 0;
};

/// CSV with LF endings, '.' decimal separator, 17-significant-digit floats.
/// Schema: `x,esr,trials,case,solver,seed` for sweeps,
/// `layer,median_rel_mse,q25,q75,case,solver,seed` for traces.
void emit_curve(const Curve& curve, const std::string& path);
Curve read_curve(const std::string& path);

struct TrialResult {
    std::size_t trial = 0;
    double final_rel_mse = 0.0;
    bool success = false;
    std::vector<double> rel_mse_trace;
};

/// Build (case 1) or train (cases 2-4) the parameters for one grid point.
/// Paired by construction: the random A and the test signals depend only on
/// (seed, grid index, trial index), never on the case.
NetworkParams prepare_point_params(const ExperimentConfig& cfg, std::size_t grid_index,
                                   std::size_t m, std::size_t k,
                                   std::vector<double>* loss_curve = nullptr);

Curve run_esr_sweep(const ExperimentConfig& cfg);
Curve run_sparsity_sweep(const ExperimentConfig& cfg);
Curve run_layer_trace(const ExperimentConfig& cfg);

struct GradCheckBlock {
    std::string mask_name;
    double max_rel_err_layers = 0.0;  // exactly 0 when the block is masked
    double max_rel_err_A = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    bool ok = false;
    int resamples = 0;
};

/// backward vs central finite differences (h = 1e-6) at margin-guarded
/// points, for every trainable-mask combination. Degenerate draws are
/// resampled from the next substream, up to 100 attempts.
GradCheckReport run_gradcheck(const ExperimentConfig& cfg);

struct TrainOutputs {
    NetworkParams params;
    std::vector<double> loss_curve;
    double test_loss = 0.0;
};

TrainOutputs run_train(const ExperimentConfig& cfg);

/// `epoch,mean_loss` CSV.
void emit_loss_curve(const std::vector<double>& curve, const std::string& path);

std::string solver_name(SolverKind kind);

}  // namespace upr
