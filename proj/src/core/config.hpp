#pragma once

#include <string>
#include <vector>

#include "core/asymptotics.hpp"
#include "core/gpe.hpp"
#include "core/townes.hpp"
#include "core/trial.hpp"
#include "json.hpp"

namespace gpelab {

using Json = nlohmann::json;

/// Commands with a config document.
bool known_command(const std::string& command);

/// Full default document for a command; "preset" selects a sweep preset.
Json default_config(const std::string& command, const std::string& preset = "");

/// Defaults (with the user's preset, if any) merged with the user document.
/// Unknown keys and invalid values raise InvalidArgument.
Json resolve_config(const std::string& command, const Json& user);

/// FNV-1a of the compact dump of the resolved config.
std::string config_hash(const Json& resolved);

TownesOptions townes_options_from(const Json& cfg);
Grid2D grid_from(const Json& cfg);
MinimizeOptions solver_from(const Json& cfg);
ProblemSpec problem_from(const Json& cfg, double astar);
SweepConfig sweep_from(const Json& cfg, double astar);
/// Schedule as fractions of a*, one (f1, f2) pair per point.
std::vector<std::pair<double, double>> schedule_fractions(const Json& cfg);
Theorem2Options theorem2_from(const Json& cfg, double lambda_expected);
Theorem3Options theorem3_from(const Json& cfg);
UnboundedConfig unbounded_from(const Json& cfg, double astar);
std::vector<SameTrapConfig> trial_from(const Json& cfg, double astar);
std::vector<LemmaAParams> lemma_a_from(const Json& cfg, double astar);

}  // namespace gpelab
