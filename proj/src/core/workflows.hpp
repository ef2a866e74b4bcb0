#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/townes.hpp"

namespace gpelab {

/// Exit statuses of a finished command. Config errors (1) are raised as
/// InvalidArgument before any compute.
enum ExitStatus : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitInvariant = 3, kExitDiagnostics = 4 };

struct CommandOutput {
  int status = kExitOk;
  /// (file name, contents) in write order; the manifest comes last.
  std::vector<std::pair<std::string, std::string>> files;
  Json summary;
  std::vector<std::string> messages;
};

/// Runs one command on a resolved config. `profile` is the ground-state
/// reference (ignored by "townes", which solves its own).
CommandOutput run_command(const std::string& command, const Json& resolved, const RadialProfile& profile);

/// Re-derives every derived column of a stored sweep and reruns its diagnostics.
CommandOutput run_report(const std::string& sweep_csv, const std::string& manifest_json,
                         const RadialProfile& profile);

/// Sweep diagnostics selected by diagnostics.kind; sets `passed`.
Json sweep_diagnostics(const Json& resolved, const std::vector<SweepRecord>& records,
                       const RadialProfile& profile, bool& passed);

/// Manifest for a set of output files (hashes, resolved config, version).
Json make_manifest(const std::string& command, const Json& resolved, const RadialProfile& profile,
                   const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace gpelab
