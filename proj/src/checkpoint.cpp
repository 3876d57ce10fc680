#include "upr/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace upr {

namespace {

using nlohmann::json;

json params_doc(const NetworkParams& p) {
    json j;
    j["version"] = 1;
    j["kind"] = p.kind == SolverKind::Sparta ? "upr-sparta" : "upr-irwf";
    j["L"] = p.depth();
    j["n"] = p.n();
    j["m"] = p.m();
    if (p.kind == SolverKind::Sparta) {
        j["alpha_baseline"] = p.sparta.alpha;
        j["solver_cfg"] = {{"s", p.sparta.s},
                           {"alpha", p.sparta.alpha},
                           {"tau", p.sparta.tau},
                           {"init_card_frac", p.sparta.init_card_frac},
                           {"power_iters", p.sparta.power_iters},
                           {"one_over_m_scaling", p.sparta.one_over_m_scaling}};
    } else {
        j["alpha_baseline"] = p.irwf.alpha;
        j["solver_cfg"] = {{"alpha", p.irwf.alpha},
                           {"power_iters", p.irwf.power_iters},
                           {"one_over_m_scaling", p.irwf.one_over_m_scaling}};
    }
    json layers = json::array();
    for (const auto& lp : p.layers) layers.push_back(lp.w);
    j["layers"] = std::move(layers);
    j["A"] = p.A.A.data;
    return j;
}

NetworkParams params_from_doc(const json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw ParseError("params: unsupported version");
    NetworkParams p;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "upr-sparta")
        p.kind = SolverKind::Sparta;
    else if (kind == "upr-irwf")
        p.kind = SolverKind::Irwf;
    else
        throw ParseError("params: unknown kind '" + kind + "'");

    std::size_t L = j.at("L").get<std::size_t>();
    std::size_t n = j.at("n").get<std::size_t>();
    std::size_t m = j.at("m").get<std::size_t>();

    const json& sc = j.at("solver_cfg");
    if (p.kind == SolverKind::Sparta) {
        p.sparta.s = sc.at("s").get<std::size_t>();
        p.sparta.alpha = sc.at("alpha").get<double>();
        p.sparta.tau = sc.at("tau").get<double>();
        p.sparta.init_card_frac = sc.at("init_card_frac").get<double>();
        p.sparta.power_iters = sc.at("power_iters").get<int>();
        p.sparta.one_over_m_scaling = sc.at("one_over_m_scaling").get<bool>();
    } else {
        p.irwf.alpha = sc.at("alpha").get<double>();
        p.irwf.power_iters = sc.at("power_iters").get<int>();
        p.irwf.one_over_m_scaling = sc.at("one_over_m_scaling").get<bool>();
    }

    p.A.A = Matrix(m, n);
    p.A.A.data = j.at("A").get<std::vector<double>>();
    if (p.A.A.data.size() != m * n) throw ParseError("params: A size != m*n");

    p.layers.clear();
    for (const auto& w : j.at("layers")) {
        LayerParams lp{w.get<Vector>()};
        if (lp.w.size() != n) throw ParseError("params: layer w length != n");
        p.layers.push_back(std::move(lp));
    }
    if (p.depth() != L) throw ParseError("params: layers count != L");
    return p;
}

}  // namespace

std::string params_to_json(const NetworkParams& params) {
    return params_doc(params).dump(2) + "\n";
}

NetworkParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("params: bad JSON: ") + e.what());
    }
    try {
        return params_from_doc(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("params: ") + e.what());
    }
}

void save_params(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for write: " + path);
    out << params_to_json(params);
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return params_from_json(text);
}

std::string checkpoint_to_json(const NetworkParams& params,
                               const std::vector<double>& loss_curve) {
    json j = params_doc(params);
    j["epoch"] = loss_curve.size();
    j["loss_curve"] = loss_curve;
    return j.dump(2) + "\n";
}

void save_checkpoint(const NetworkParams& params, const std::vector<double>& loss_curve,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for write: " + path);
    out << checkpoint_to_json(params, loss_curve);
}

NetworkParams load_checkpoint(const std::string& path, std::vector<double>* loss_curve) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: bad JSON: ") + e.what());
    }
    if (loss_curve && j.contains("loss_curve"))
        *loss_curve = j.at("loss_curve").get<std::vector<double>>();
    return params_from_json(text);
}

}  // namespace upr
