// Command-line front end. Talks to the library only through gpelab.h.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "gpelab.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

bool slurp(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream s;
  s << in.rdbuf();
  out = s.str();
  return true;
}

bool write_all(const fs::path& path, const char* data, std::size_t size) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) return false;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  return !ec;
}

// library error code -> process exit code
int exit_for(int code) {
  return code == GPELAB_E_INVALID_ARGUMENT || code == GPELAB_E_PARSE ? GPELAB_EXIT_CONFIG : GPELAB_EXIT_SOLVER;
}

int emit(gpelab_output* out, const std::string& dir, bool quiet) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir << ": " << ec.message() << "\n";
    gpelab_output_free(out);
    return GPELAB_EXIT_SOLVER;
  }
  const std::size_t n = gpelab_output_file_count(out);
  for (std::size_t k = 0; k < n; ++k) {
    const char* name = nullptr;
    const char* data = nullptr;
    std::size_t size = 0;
    gpelab_output_file(out, k, &name, &data, &size);
    if (!write_all(fs::path(dir) / name, data, size)) {
      std::cerr << "error: cannot write " << (fs::path(dir) / name).string() << "\n";
      gpelab_output_free(out);
      return GPELAB_EXIT_SOLVER;
    }
    if (!quiet) std::cout << "wrote " << (fs::path(dir) / name).string() << "\n";
  }
  for (std::size_t k = 0; k < gpelab_output_message_count(out); ++k)
    std::cerr << gpelab_output_message(out, k) << "\n";
  const int status = gpelab_output_status(out);
  gpelab_output_free(out);
  return status;
}

void print_townes_checks(const Json& s) {
  std::printf("a*                      %.15g\n", s["astar"].get<double>());
  std::printf("Q(0)                    %.15g\n", s["q0"].get<double>());
  std::printf("|kinetic/mass - 1|      %.3e\n", s["identity_kinetic"].get<double>());
  std::printf("|quartic/(2 mass) - 1|  %.3e\n", s["identity_quartic"].get<double>());
  std::printf("GN residual (grid)      %.3e\n", s["gn_residual"].get<double>());
  std::printf("step halving            %.3e\n", s["step_halving"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of two-component attractive condensates near the critical coupling"};
  app.set_version_flag("--version", std::string(gpelab_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", preset, q_reference;
  int jobs = 0;
  bool check = false, compare = false, print_config = false, quiet = false;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    c->add_option("--out", out_dir, "output directory")->capture_default_str();
    c->add_option("--jobs", jobs, "parallel sweep points (cold start only)")->check(CLI::PositiveNumber);
    c->add_flag("--check", check, "print invariant checks");
    c->add_option("--q-reference", q_reference, "ground-state JSON written by 'townes'");
    c->add_flag("--print-config", print_config, "print the resolved config and exit");
    c->add_flag("--quiet", quiet, "do not list written files");
  };
  for (const char* name : {"townes", "single", "pair", "sweep", "unbounded", "trial", "lemma-a"}) {
    CLI::App* c = app.add_subcommand(name, std::string("run '") + name + "'");
    common(c);
    if (std::string(name) == "sweep") c->add_option("--preset", preset, "theorem2, theorem3 or scaling");
    if (std::string(name) == "trial") c->add_flag("--compare", compare, "also minimize at each point");
  }
  std::string sweep_dir, sweep_csv, manifest_path;
  CLI::App* report = app.add_subcommand("report", "re-derive a stored sweep");
  report->add_option("dir", sweep_dir, "directory holding sweep.csv and manifest.json");
  report->add_option("--csv", sweep_csv, "sweep.csv path");
  report->add_option("--manifest", manifest_path, "manifest.json path");
  report->add_option("--out", out_dir, "output directory")->capture_default_str();
  report->add_option("--q-reference", q_reference, "ground-state JSON written by 'townes'");
  report->add_flag("--quiet", quiet, "do not list written files");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  gpelab_profile* profile = nullptr;
  if (!q_reference.empty()) {
    std::string text;
    if (!slurp(q_reference, text)) {
      std::cerr << "error: cannot read " << q_reference << "\n";
      return GPELAB_EXIT_CONFIG;
    }
    if (gpelab_profile_from_json(text.c_str(), &profile) != GPELAB_OK) {
      std::cerr << "error: " << gpelab_last_error() << "\n";
      return GPELAB_EXIT_CONFIG;
    }
  }

  if (command == "report") {
    if (!sweep_dir.empty()) {
      if (sweep_csv.empty()) sweep_csv = (fs::path(sweep_dir) / "sweep.csv").string();
      if (manifest_path.empty()) manifest_path = (fs::path(sweep_dir) / "manifest.json").string();
    }
    std::string csv, manifest;
    if (sweep_csv.empty() || !slurp(sweep_csv, csv) || manifest_path.empty() || !slurp(manifest_path, manifest)) {
      std::cerr << "error: report needs readable sweep.csv and manifest.json\n";
      gpelab_profile_free(profile);
      return GPELAB_EXIT_CONFIG;
    }
    gpelab_output* out = nullptr;
    const int rc = gpelab_run_report(csv.c_str(), manifest.c_str(), profile, &out);
    gpelab_profile_free(profile);
    if (rc) {
      std::cerr << "error: " << gpelab_last_error() << "\n";
      return exit_for(rc);
    }
    return emit(out, out_dir, quiet);
  }

  Json user = Json::object();
  if (!config_path.empty()) {
    std::string text;
    if (!slurp(config_path, text)) {
      std::cerr << "error: cannot read " << config_path << "\n";
      gpelab_profile_free(profile);
      return GPELAB_EXIT_CONFIG;
    }
    try {
      user = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << "\n";
      gpelab_profile_free(profile);
      return GPELAB_EXIT_CONFIG;
    }
    if (!user.is_object()) {
      std::cerr << "error: " << config_path << ": config must be a JSON object\n";
      gpelab_profile_free(profile);
      return GPELAB_EXIT_CONFIG;
    }
  }
  // flags win over the file
  // only sweeps have independent work items; elsewhere --jobs is a no-op
  if (jobs > 0 && command == "sweep") {
    user["jobs"] = jobs;
    if (jobs > 1) user["warm_start"] = false;
  }
  if (!preset.empty()) user["preset"] = preset;
  if (compare) user["compare"] = true;
  if (!q_reference.empty() && command != "townes") user["paths"]["q_reference"] = q_reference;

  const std::string user_text = user.dump();
  if (print_config) {
    char* resolved = nullptr;
    const int rc = gpelab_resolve_config(command.c_str(), user_text.c_str(), &resolved);
    gpelab_profile_free(profile);
    if (rc) {
      std::cerr << "error: " << gpelab_last_error() << "\n";
      return exit_for(rc);
    }
    std::cout << resolved << "\n";
    gpelab_string_free(resolved);
    return 0;
  }

  gpelab_output* out = nullptr;
  const int rc = gpelab_run_command(command.c_str(), user_text.c_str(), profile, &out);
  gpelab_profile_free(profile);
  if (rc) {
    std::cerr << "error: " << gpelab_last_error() << "\n";
    return exit_for(rc);
  }
  const Json summary = Json::parse(gpelab_output_summary(out));
  if (command == "townes" && check) print_townes_checks(summary);
  if (command == "sweep" && check) std::cout << summary["diagnostics"].dump(2) << "\n";
  return emit(out, out_dir, quiet);
}
