#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "upr/harness.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct GlobalOpts {
    int threads = 0;
    std::string preset;
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

upr::ExperimentConfig load_config(const GlobalOpts& g) {
    upr::ExperimentConfig cfg = upr::parse_config(g.config_path);
    if (!g.preset.empty()) upr::apply_preset(cfg, g.preset);
    if (g.seed_set) cfg.seed = g.seed;
    if (const char* env = std::getenv("UPR_SEED")) cfg.seed = std::stoull(env);
    return cfg;
}

void write_metadata(const std::string& out_path, double wall_seconds) {
    std::ofstream meta(out_path + ".meta.json", std::ios::binary);
    auto now = std::chrono::system_clock::now().time_since_epoch();
    meta << "{\n  \"wall_time_seconds\": " << wall_seconds << ",\n  \"generated_unix\": "
         << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n}\n";
}

int run_sweep(const GlobalOpts& g, upr::ExperimentKind kind) {
    upr::ExperimentConfig cfg = load_config(g);
    cfg.experiment = kind;
    auto t0 = Clock::now();
    upr::Curve curve;
    switch (kind) {
        case upr::ExperimentKind::EsrSweep: curve = upr::run_esr_sweep(cfg); break;
        case upr::ExperimentKind::SparsitySweep: curve = upr::run_sparsity_sweep(cfg); break;
        default: curve = upr::run_layer_trace(cfg); break;
    }
    std::string out = g.out.empty() ? cfg.output : g.out;
    if (out.empty()) throw upr::ParseError("no output path (--out or config `output`)");
    upr::emit_curve(curve, out);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    write_metadata(out, secs);
    std::cout << "wrote " << out << " (" << curve.x.size() << " rows, " << secs << "s)\n";
    return 0;
}

int run_train_cmd(const GlobalOpts& g) {
    upr::ExperimentConfig cfg = load_config(g);
    cfg.experiment = upr::ExperimentKind::Train;
    std::string dir = g.out.empty() ? cfg.output : g.out;
    if (dir.empty()) throw upr::ParseError("no output dir (--out or config `output`)");
    std::filesystem::create_directories(dir);

    auto t0 = Clock::now();
    upr::TrainOutputs out = upr::run_train(cfg);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();

    upr::save_checkpoint(out.params, out.loss_curve, dir + "/checkpoint.json");
    upr::emit_loss_curve(out.loss_curve, dir + "/loss_curve.csv");
    write_metadata(dir + "/checkpoint.json", secs);
    std::cout << "trained " << cfg.train.epochs << " epochs in " << secs
              << "s; final train loss "
              << (out.loss_curve.empty() ? 0.0 : out.loss_curve.back())
              << ", test loss " << out.test_loss << "\n";
    std::cout << "wrote " << dir << "/checkpoint.json, " << dir << "/loss_curve.csv\n";
    return 0;
}

int run_gradcheck_cmd(const GlobalOpts& g) {
    upr::ExperimentConfig cfg = load_config(g);
    cfg.experiment = upr::ExperimentKind::GradCheck;
    upr::GradCheckReport report = upr::run_gradcheck(cfg);
    for (const auto& b : report.blocks)
        std::cout << b.mask_name << ": max_rel_err_layers=" << b.max_rel_err_layers
                  << " max_rel_err_A=" << b.max_rel_err_A << "\n";
    if (report.resamples) std::cout << "resampled " << report.resamples << " degenerate draws\n";
    std::cout << (report.ok ? "gradcheck PASS" : "gradcheck FAIL") << "\n";
    return report.ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-based deep phase retrieval: unfolded SPARTA/IRWF solvers,"
                 " training, and Monte-Carlo benchmarks"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker threads (0 = library default)");
    app.add_option("--preset", g.preset, "paper or desk parameter preset");

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", g.config_path, "experiment config file")->required();
        if (needs_out) sub->add_option("--out", g.out, "output path");
        sub->add_option("--seed", g.seed, "override config seed")
            ->each([&](const std::string&) { g.seed_set = true; });
    };

    auto* train = app.add_subcommand("train", "train a network, save checkpoint + loss curve");
    add_common(train, true);
    auto* esr = app.add_subcommand("sweep-esr", "ESR vs m/n curve");
    add_common(esr, true);
    auto* sparsity = app.add_subcommand("sweep-sparsity", "ESR vs sparsity curve");
    add_common(sparsity, true);
    auto* trace = app.add_subcommand("trace", "per-layer relative MSE quartiles");
    add_common(trace, true);
    auto* gradcheck = app.add_subcommand("gradcheck", "backward vs finite differences");
    add_common(gradcheck, false);

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

    try {
        if (app.got_subcommand(train)) return run_train_cmd(g);
        if (app.got_subcommand(esr)) return run_sweep(g, upr::ExperimentKind::EsrSweep);
        if (app.got_subcommand(sparsity))
            return run_sweep(g, upr::ExperimentKind::SparsitySweep);
        if (app.got_subcommand(trace)) return run_sweep(g, upr::ExperimentKind::LayerTrace);
        if (app.got_subcommand(gradcheck)) return run_gradcheck_cmd(g);
    } catch (const upr::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
