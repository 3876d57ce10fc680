#pragma once

#include <string>

#include "upr/unfolded.hpp"

namespace upr {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Versioned JSON document: {version, kind, L, n, m, alpha_baseline,
/// solver_cfg, layers, A}. Doubles are emitted with shortest-round-trip
/// encoding, so load(save(p)) is exact.
std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

/// Checkpoint = params document plus {epoch, loss_curve}.
std::string checkpoint_to_json(const NetworkParams& params,
                               const std::vector<double>& loss_curve);
void save_checkpoint(const NetworkParams& params, const std::vector<double>& loss_curve,
                     const std::string& path);
NetworkParams load_checkpoint(const std::string& path,
                              std::vector<double>* loss_curve = nullptr);

}  // namespace upr
