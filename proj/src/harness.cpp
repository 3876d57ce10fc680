#include "upr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace upr {

std::string solver_name(SolverKind kind) {
    return kind == SolverKind::Sparta ? "sparta" : "irwf";
}

// ---- config --------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_key(const std::string& origin, int line, const std::string& key,
                          const std::string& what) {
    throw ParseError(origin + ":" + std::to_string(line) + ": key '" + key + "': " + what);
}

double to_double(const std::string& origin, int line, const std::string& key,
                 const std::string& v) {
    try {
        std::size_t pos;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        bad_key(origin, line, key, "expected number, got '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& origin, int line, const std::string& key,
                     const std::string& v) {
    try {
        std::size_t pos;
        std::uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return u;
    } catch (...) {
        bad_key(origin, line, key, "expected nonnegative integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& origin, int line, const std::string& key,
             const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_key(origin, line, key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    bool s_set = false;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) +
                             ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        cfg.keys_set.push_back(key);

        if (key == "experiment") {
            if (val == "esr_sweep")
                cfg.experiment = ExperimentKind::EsrSweep;
            else if (val == "sparsity_sweep")
                cfg.experiment = ExperimentKind::SparsitySweep;
            else if (val == "layer_trace")
                cfg.experiment = ExperimentKind::LayerTrace;
            else if (val == "train")
                cfg.experiment = ExperimentKind::Train;
            else if (val == "gradcheck")
                cfg.experiment = ExperimentKind::GradCheck;
            else
                bad_key(origin, lineno, key, "unknown experiment '" + val + "'");
        } else if (key == "solver") {
            if (val == "sparta")
                cfg.solver = SolverKind::Sparta;
            else if (val == "irwf")
                cfg.solver = SolverKind::Irwf;
            else
                bad_key(origin, lineno, key, "unknown solver '" + val + "'");
        } else if (key == "case") {
            auto c = to_u64(origin, lineno, key, val);
            if (c < 1 || c > 4) bad_key(origin, lineno, key, "case must be 1..4");
            cfg.case_label = static_cast<int>(c);
        } else if (key == "n") {
            cfg.n = to_u64(origin, lineno, key, val);
        } else if (key == "k") {
            cfg.k = to_u64(origin, lineno, key, val);
        } else if (key == "m") {
            cfg.m = to_u64(origin, lineno, key, val);
        } else if (key == "L") {
            cfg.L = to_u64(origin, lineno, key, val);
        } else if (key == "trials") {
            cfg.trials = to_u64(origin, lineno, key, val);
        } else if (key == "train_size") {
            cfg.train_size = to_u64(origin, lineno, key, val);
        } else if (key == "test_size") {
            cfg.test_size = to_u64(origin, lineno, key, val);
        } else if (key == "seed") {
            cfg.seed = to_u64(origin, lineno, key, val);
        } else if (key == "m_over_n_grid") {
            cfg.m_over_n_grid.clear();
            for (const auto& item : split_commas(val))
                cfg.m_over_n_grid.push_back(to_double(origin, lineno, key, item));
            if (cfg.m_over_n_grid.empty()) bad_key(origin, lineno, key, "empty grid");
        } else if (key == "k_grid") {
            cfg.k_grid.clear();
            for (const auto& item : split_commas(val))
                cfg.k_grid.push_back(to_u64(origin, lineno, key, item));
            if (cfg.k_grid.empty()) bad_key(origin, lineno, key, "empty grid");
        } else if (key == "alpha") {
            double a = to_double(origin, lineno, key, val);
            cfg.sparta.alpha = a;
            cfg.irwf.alpha = a;
        } else if (key == "tau") {
            cfg.sparta.tau = to_double(origin, lineno, key, val);
        } else if (key == "s") {
            cfg.sparta.s = to_u64(origin, lineno, key, val);
            s_set = true;
        } else if (key == "init_card_frac") {
            cfg.sparta.init_card_frac = to_double(origin, lineno, key, val);
        } else if (key == "power_iters") {
            int p = static_cast<int>(to_u64(origin, lineno, key, val));
            cfg.sparta.power_iters = p;
            cfg.irwf.power_iters = p;
        } else if (key == "one_over_m_scaling") {
            bool b = to_bool(origin, lineno, key, val);
            cfg.sparta.one_over_m_scaling = b;
            cfg.irwf.one_over_m_scaling = b;
        } else if (key == "epochs") {
            cfg.train.epochs = static_cast<int>(to_u64(origin, lineno, key, val));
        } else if (key == "batch_size") {
            cfg.train.batch_size = to_u64(origin, lineno, key, val);
        } else if (key == "learning_rate") {
            cfg.train.learning_rate = to_double(origin, lineno, key, val);
        } else if (key == "adam_beta1") {
            cfg.train.adam_beta1 = to_double(origin, lineno, key, val);
        } else if (key == "adam_beta2") {
            cfg.train.adam_beta2 = to_double(origin, lineno, key, val);
        } else if (key == "adam_eps") {
            cfg.train.adam_eps = to_double(origin, lineno, key, val);
        } else if (key == "checkpoint_dir") {
            cfg.checkpoint_dir = val;
        } else if (key == "output") {
            cfg.output = val;
        } else {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                             key + "'");
        }
    }
    if (!s_set) cfg.sparta.s = cfg.k;
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config_text(text, path);
}

void apply_preset(ExperimentConfig& cfg, const std::string& preset) {
    auto unset = [&](const char* key) {
        return std::find(cfg.keys_set.begin(), cfg.keys_set.end(), key) ==
               cfg.keys_set.end();
    };
    bool sparta = cfg.solver == SolverKind::Sparta;
    if (preset == "paper") {
        if (unset("n")) cfg.n = 100;
        if (unset("k")) cfg.k = 5;
        if (unset("L")) cfg.L = sparta ? 20 : 50;
        if (unset("trials")) cfg.trials = 100;
        if (unset("train_size")) cfg.train_size = 2048;
        if (unset("test_size")) cfg.test_size = 2048;
        if (unset("epochs")) cfg.train.epochs = 100;
        if (unset("learning_rate")) cfg.train.learning_rate = 1e-4;
    } else if (preset == "desk") {
        if (unset("n")) cfg.n = 50;
        if (unset("k")) cfg.k = 3;
        if (unset("L")) cfg.L = sparta ? 10 : 25;
        if (unset("trials")) cfg.trials = 50;
        if (unset("train_size")) cfg.train_size = 512;
        if (unset("test_size")) cfg.test_size = 512;
        if (unset("epochs")) cfg.train.epochs = 50;
        if (unset("learning_rate")) cfg.train.learning_rate = 1e-4;
    } else {
        throw ParseError("unknown preset '" + preset + "' (expected paper or desk)");
    }
    if (unset("s")) cfg.sparta.s = cfg.k;
}

// ---- CSV -----------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void emit_curve(const Curve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for write: " + path);
    bool trace = !curve.q25.empty();
    if (trace)
        out << "layer,median_rel_mse,q25,q75,case,solver,seed\n";
    else
        out << "x,esr,trials,case,solver,seed\n";
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        if (trace) {
            out << fmt17(curve.x[i]) << ',' << fmt17(curve.y[i]) << ','
                << fmt17(curve.q25[i]) << ',' << fmt17(curve.q75[i]) << ','
                << curve.case_labels[i] << ',' << solver_name(curve.solver) << ','
                << curve.seed << '\n';
        } else {
            out << fmt17(curve.x[i]) << ',' << fmt17(curve.y[i]) << ',' << curve.trials
                << ',' << curve.case_labels[i] << ',' << solver_name(curve.solver) << ','
                << curve.seed << '\n';
        }
    }
}

Curve read_curve(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty curve file: " + path);
    bool trace = header.rfind("layer,", 0) == 0;
    if (!trace && header != "x,esr,trials,case,solver,seed")
        throw ParseError("unrecognized curve header: " + header);
    Curve c;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_commas(line);
        if (trace) {
            if (cells.size() != 7) throw ParseError("bad trace row: " + line);
            c.x.push_back(std::stod(cells[0]));
            c.y.push_back(std::stod(cells[1]));
            c.q25.push_back(std::stod(cells[2]));
            c.q75.push_back(std::stod(cells[3]));
            c.case_labels.push_back(std::stoi(cells[4]));
            c.solver = cells[5] == "sparta" ? SolverKind::Sparta : SolverKind::Irwf;
            c.seed = std::stoull(cells[6]);
        } else {
            if (cells.size() != 6) throw ParseError("bad curve row: " + line);
            c.x.push_back(std::stod(cells[0]));
            c.y.push_back(std::stod(cells[1]));
            c.trials = std::stoull(cells[2]);
            c.case_labels.push_back(std::stoi(cells[3]));
            c.solver = cells[4] == "sparta" ? SolverKind::Sparta : SolverKind::Irwf;
            c.seed = std::stoull(cells[5]);
        }
    }
    return c;
}

void emit_loss_curve(const std::vector<double>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for write: " + path);
    out << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < curve.size(); ++e)
        out << e << ',' << fmt17(curve[e]) << '\n';
}

// ---- experiments ---------------------------------------------------------

namespace {

Vector sparse_signal(std::size_t n, std::size_t k, Rng& rng) {
    Vector x(n, 0.0);
    if (k >= n) {
        for (double& v : x) v = rng.next_gaussian();
        return x;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t r = j + static_cast<std::size_t>(rng.next_u64() % (n - j));
        std::swap(idx[j], idx[r]);
    }
    for (std::size_t j = 0; j < k; ++j) x[idx[j]] = rng.next_gaussian();
    return x;
}

TrainableMask mask_for_case(int case_label) {
    switch (case_label) {
        case 2: return {true, false};
        case 3: return {false, true};
        case 4: return {true, true};
        default: return {false, false};
    }
}

/// Dense signals for IRWF unless k was set explicitly.
std::size_t effective_k(const ExperimentConfig& cfg) {
    if (cfg.solver == SolverKind::Irwf &&
        std::find(cfg.keys_set.begin(), cfg.keys_set.end(), "k") == cfg.keys_set.end())
        return cfg.n;
    return cfg.k;
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

NetworkParams prepare_point_params(const ExperimentConfig& cfg, std::size_t grid_index,
                                   std::size_t m, std::size_t k,
                                   std::vector<double>* loss_curve) {
    Rng root(cfg.seed);
    Rng a_rng = root.substream("A", grid_index);
    SensingMatrix A{gaussian_matrix(m, cfg.n, a_rng)};

    SpartaConfig sp = cfg.sparta;
    sp.s = std::min(k, cfg.n);
    double alpha = cfg.solver == SolverKind::Sparta ? sp.alpha : cfg.irwf.alpha;
    NetworkParams params =
        make_identity_params(cfg.L, alpha, cfg.solver, std::move(A), sp, cfg.irwf);
    if (cfg.case_label == 1) return params;

    if (!cfg.checkpoint_dir.empty()) {
        std::string path =
            cfg.checkpoint_dir + "/point_" + std::to_string(grid_index) + ".json";
        std::ifstream probe(path);
        if (!probe)
            throw ParseError("missing checkpoint for grid point " +
                             std::to_string(grid_index) + ": " + path);
        return load_checkpoint(path, loss_curve);
    }

    Dataset data =
        generate_dataset(cfg.n, k, cfg.train_size, root.substream("trainset", grid_index).next_u64());
    TrainConfig tc = cfg.train;
    tc.mask = mask_for_case(cfg.case_label);
    tc.batch_size = std::min(tc.batch_size, data.samples.size());
    tc.seed = root.substream("train", grid_index).next_u64();
    TrainResult tr = train(params, data, tc);
    if (loss_curve) *loss_curve = tr.loss_curve;
    return tr.params;
}

namespace {

// Paired test signal for (seed, grid point, trial): independent of case.
Vector trial_signal(const ExperimentConfig& cfg, std::size_t grid_index, std::size_t trial,
                    std::size_t k) {
    Rng sub = Rng(cfg.seed).substream("trial", grid_index, trial);
    return sparse_signal(cfg.n, k, sub);
}

double esr_at_point(const ExperimentConfig& cfg, const NetworkParams& params,
                    std::size_t grid_index, std::size_t k) {
    const std::int64_t T = static_cast<std::int64_t>(cfg.trials);
    std::vector<char> success(cfg.trials, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < T; ++t) {
        Vector x = trial_signal(cfg, grid_index, static_cast<std::size_t>(t), k);
        Measurements y = encode(params.A, x);
        Rng init_rng =
            Rng(cfg.seed).substream("trial", grid_index, static_cast<std::uint64_t>(t))
                .substream("init");
        Vector z0 = init_for(params, y, init_rng);
        SolverTrace tr = forward(params, y, z0);
        success[t] = is_success(relative_mse(tr.iterates.back(), x)) ? 1 : 0;
    }
    std::size_t ok = 0;
    for (char s : success) ok += s;
    return static_cast<double>(ok) / static_cast<double>(cfg.trials);
}

}  // namespace

Curve run_esr_sweep(const ExperimentConfig& cfg) {
    if (cfg.m_over_n_grid.empty()) throw ParseError("esr_sweep: m_over_n_grid required");
    std::size_t k = effective_k(cfg);
    Curve curve;
    curve.trials = cfg.trials;
    curve.solver = cfg.solver;
    curve.seed = cfg.seed;
    for (std::size_t gi = 0; gi < cfg.m_over_n_grid.size(); ++gi) {
        double ratio = cfg.m_over_n_grid[gi];
        std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(ratio * static_cast<double>(cfg.n))));
        NetworkParams params = prepare_point_params(cfg, gi, m, k);
        curve.x.push_back(ratio);
        curve.y.push_back(esr_at_point(cfg, params, gi, k));
        curve.case_labels.push_back(cfg.case_label);
    }
    return curve;
}

Curve run_sparsity_sweep(const ExperimentConfig& cfg) {
    if (cfg.k_grid.empty()) throw ParseError("sparsity_sweep: k_grid required");
    std::size_t m = cfg.m ? cfg.m : cfg.n;
    Curve curve;
    curve.trials = cfg.trials;
    curve.solver = cfg.solver;
    curve.seed = cfg.seed;
    for (std::size_t gi = 0; gi < cfg.k_grid.size(); ++gi) {
        std::size_t k = cfg.k_grid[gi];
        if (k < 1 || k > cfg.n) throw ParseError("sparsity_sweep: k out of [1, n]");
        NetworkParams params = prepare_point_params(cfg, gi, m, k);
        curve.x.push_back(static_cast<double>(k));
        curve.y.push_back(esr_at_point(cfg, params, gi, k));
        curve.case_labels.push_back(cfg.case_label);
    }
    return curve;
}

Curve run_layer_trace(const ExperimentConfig& cfg) {
    if (cfg.L < 1) throw ParseError("layer_trace: L >= 1 required");
    std::size_t m = cfg.m ? cfg.m : cfg.n;
    std::size_t k = effective_k(cfg);

    Curve curve;
    curve.trials = cfg.trials;
    curve.solver = cfg.solver;
    curve.seed = cfg.seed;

    auto add_rows = [&](const NetworkParams& params, int case_label) {
        const std::int64_t T = static_cast<std::int64_t>(cfg.trials);
        std::vector<std::vector<double>> traces(cfg.trials);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t t = 0; t < T; ++t) {
            Vector x = trial_signal(cfg, 0, static_cast<std::size_t>(t), k);
            Measurements y = encode(params.A, x);
            Rng init_rng =
                Rng(cfg.seed).substream("trial", 0, static_cast<std::uint64_t>(t))
                    .substream("init");
            Vector z0 = init_for(params, y, init_rng);
            SolverTrace tr = forward(params, y, z0, x);
            traces[t] = tr.rel_mse_per_iter;
        }
        for (std::size_t l = 0; l <= cfg.L; ++l) {
            std::vector<double> at_layer(cfg.trials);
            for (std::size_t t = 0; t < cfg.trials; ++t) at_layer[t] = traces[t][l];
            curve.x.push_back(static_cast<double>(l));
            curve.y.push_back(quantile(at_layer, 0.5));
            curve.q25.push_back(quantile(at_layer, 0.25));
            curve.q75.push_back(quantile(at_layer, 0.75));
            curve.case_labels.push_back(case_label);
        }
    };

    // baseline rows first, then the learned case (paired A and signals)
    ExperimentConfig base = cfg;
    base.case_label = 1;
    add_rows(prepare_point_params(base, 0, m, k), 1);
    if (cfg.case_label != 1) add_rows(prepare_point_params(cfg, 0, m, k), cfg.case_label);
    return curve;
}

TrainOutputs run_train(const ExperimentConfig& cfg) {
    std::size_t m = cfg.m ? cfg.m : cfg.n;
    std::size_t k = effective_k(cfg);
    if (cfg.case_label == 1) throw ParseError("train: case must be 2, 3, or 4");
    TrainOutputs out;
    out.params = prepare_point_params(cfg, 0, m, k, &out.loss_curve);

    Dataset test = generate_dataset(cfg.n, k, cfg.test_size,
                                    Rng(cfg.seed).substream("testset").next_u64());
    Rng test_rng = Rng(cfg.seed).substream("testloss");
    out.test_loss = loss_batch(out.params, test.samples, test_rng);
    return out;
}

// ---- gradcheck -----------------------------------------------------------

namespace {

// Smallest distance to any nondifferentiability along the forward pass:
// measurement signs, truncation-set boundaries, top-s magnitude gaps, the
// phase-distance branch, and the encoder signs.
double forward_margin(const NetworkParams& params, const Vector& x, const Vector& z0) {
    double margin = std::numeric_limits<double>::infinity();
    Vector Ax = matvec(params.A.A, x);
    for (double v : Ax) margin = std::min(margin, std::abs(v));
    Measurements y(Ax.size());
    for (std::size_t i = 0; i < Ax.size(); ++i) y[i] = std::abs(Ax[i]);

    bool sparta = params.kind == SolverKind::Sparta;
    Vector z = z0;
    for (const LayerParams& lp : params.layers) {
        Vector p = matvec(params.A.A, z);
        for (std::size_t i = 0; i < p.size(); ++i) {
            margin = std::min(margin, std::abs(p[i]));
            if (sparta)
                margin = std::min(margin,
                                  std::abs(std::abs(p[i]) - y[i] / (1.0 + params.sparta.tau)));
        }
        if (sparta) {
            auto iset = sparta_truncation_set(params.A, y, z, params.sparta.tau);
            Vector g = sparta_gradient(params.A, y, z, iset, params.sparta.one_over_m_scaling);
            Vector v = z;
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= lp.w[j] * lp.w[j] * g[j];
            Vector mags(v.size());
            for (std::size_t j = 0; j < v.size(); ++j) mags[j] = std::abs(v[j]);
            std::sort(mags.begin(), mags.end(), std::greater<double>());
            std::size_t s = params.sparta.s;
            if (s < mags.size()) margin = std::min(margin, mags[s - 1] - mags[s]);
            z = hard_threshold(v, s);
        } else {
            z = upr_irwf_layer(z, params.A, y, lp, params.irwf);
        }
    }
    double dm = 0.0, dp = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        dm += (z[j] - x[j]) * (z[j] - x[j]);
        dp += (z[j] + x[j]) * (z[j] + x[j]);
    }
    margin = std::min(margin, std::abs(dm - dp));
    return margin;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

GradCheckReport run_gradcheck(const ExperimentConfig& cfg) {
    const double h = 1e-6;
    const double margin_floor = 1e-3;
    const double tol = 1e-5;
    std::size_t k = effective_k(cfg);
    std::size_t m = cfg.m ? cfg.m : 2 * cfg.n;

    GradCheckReport report;
    report.ok = true;
    struct MaskCase {
        const char* name;
        TrainableMask mask;
    };
    const MaskCase cases[] = {{"A_only", {true, false}},
                              {"layers_only", {false, true}},
                              {"A_and_layers", {true, true}}};

    for (const auto& mc : cases) {
        // find a margin-guarded instance
        NetworkParams params;
        Vector x, z0;
        bool found = false;
        for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
            Rng root = Rng(cfg.seed).substream("gradcheck", attempt);
            SensingMatrix A{gaussian_matrix(m, cfg.n, root)};
            SpartaConfig sp = cfg.sparta;
            sp.s = std::min(k, cfg.n);
            double alpha = cfg.solver == SolverKind::Sparta ? sp.alpha : cfg.irwf.alpha;
            params = make_identity_params(cfg.L, alpha, cfg.solver, std::move(A), sp,
                                          cfg.irwf);
            // jitter w so the point is generic, not the baseline edge
            for (auto& lp : params.layers)
                for (double& w : lp.w) w += 0.1 * root.next_gaussian();
            x = sparse_signal(cfg.n, k, root);
            Measurements y = encode(params.A, x);
            Rng init_rng = root.substream("init");
            z0 = init_for(params, y, init_rng);
            if (forward_margin(params, x, z0) > margin_floor) {
                found = true;
                break;
            }
            ++report.resamples;
        }
        if (!found) throw ParseError("gradcheck: no margin-guarded instance in 100 draws");

        GradBundle grads = GradBundle::zeros_like(params);
        backward_sample(params, x, z0, mc.mask, grads);

        GradCheckBlock block;
        block.mask_name = mc.name;

        NetworkParams probe = params;
        for (std::size_t l = 0; l < params.depth(); ++l) {
            for (std::size_t j = 0; j < cfg.n; ++j) {
                double bw = grads.d_layers[l][j];
                if (!mc.mask.train_layers) {
                    block.max_rel_err_layers = std::max(block.max_rel_err_layers,
                                                        std::abs(bw));
                    continue;
                }
                double orig = probe.layers[l].w[j];
                probe.layers[l].w[j] = orig + h;
                double fp = loss_sample(probe, x, z0);
                probe.layers[l].w[j] = orig - h;
                double fm = loss_sample(probe, x, z0);
                probe.layers[l].w[j] = orig;
                double fd = (fp - fm) / (2.0 * h);
                block.max_rel_err_layers = std::max(block.max_rel_err_layers,
                                                    rel_err(fd, bw));
            }
        }
        for (std::size_t i = 0; i < m * cfg.n; ++i) {
            double bw = grads.d_A.data[i];
            if (!mc.mask.train_A) {
                block.max_rel_err_A = std::max(block.max_rel_err_A, std::abs(bw));
                continue;
            }
            double orig = probe.A.A.data[i];
            probe.A.A.data[i] = orig + h;
            double fp = loss_sample(probe, x, z0);
            probe.A.A.data[i] = orig - h;
            double fm = loss_sample(probe, x, z0);
            probe.A.A.data[i] = orig;
            double fd = (fp - fm) / (2.0 * h);
            block.max_rel_err_A = std::max(block.max_rel_err_A, rel_err(fd, bw));
        }
        if (block.max_rel_err_layers > tol || block.max_rel_err_A > tol)
            report.ok = false;
        report.blocks.push_back(block);
    }
    return report;
}

}  // namespace upr
