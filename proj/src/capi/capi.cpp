#include "gpelab.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/workflows.hpp"

using namespace gpelab;

struct gpelab_profile {
  RadialProfile value;
};

struct gpelab_result {
  SolveResult value;
};

struct gpelab_field {
  ScalarField value;
};

struct gpelab_output {
  CommandOutput value;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs `fn`, mapping exceptions onto status codes.
template <class F>
int guarded(F&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GPELAB_OK;
  } catch (const Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(GPELAB_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GPELAB_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GPELAB_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(GPELAB_E_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

TrapSpec trap_of(const gpelab_trap& t) { return {{t.center_x, t.center_y}, t.p}; }

Json parse_user(const char* text) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
}

gpelab_output* wrap(CommandOutput o) {
  auto* out = new gpelab_output{std::move(o), {}};
  out->summary = out->value.summary.dump(2);
  return out;
}

}  // namespace

extern "C" {

const char* gpelab_version(void) { return kVersion; }
const char* gpelab_last_error(void) { return g_last_error.c_str(); }

const char* gpelab_error_name(int code) {
  if (code == GPELAB_OK) return "Ok";
  if (code == GPELAB_E_INTERNAL) return "Internal";
  if (code < GPELAB_E_INVALID_ARGUMENT || code > GPELAB_E_PARSE) return "Unknown";
  return error_code_name(static_cast<ErrorCode>(code));
}

void gpelab_string_free(char* s) { std::free(s); }

int gpelab_profile_solve(double tolerance, double r_max, double step, gpelab_profile** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new gpelab_profile{solve_townes(TownesOptions{tolerance, r_max, step})};
  });
}

int gpelab_profile_reference(gpelab_profile** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new gpelab_profile{reference_profile()};
  });
}

int gpelab_profile_from_json(const char* text, gpelab_profile** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new gpelab_profile{profile_from_json(text)};
  });
}

int gpelab_profile_to_json(const gpelab_profile* profile, char** out) {
  return guarded([&] {
    need(profile, "profile");
    need(out, "out");
    *out = nullptr;
    *out = dup(profile_to_json(profile->value));
  });
}

void gpelab_profile_free(gpelab_profile* profile) { delete profile; }

int gpelab_profile_value(const gpelab_profile* profile, double r, double* out) {
  return guarded([&] {
    need(profile, "profile");
    need(out, "out");
    require(r >= 0.0, "r must be >= 0");
    *out = profile->value.value(r);
  });
}

int gpelab_profile_constants(const gpelab_profile* profile, double p, gpelab_constants* out) {
  return guarded([&] {
    need(profile, "profile");
    need(out, "out");
    const RadialProfile& q = profile->value;
    *out = {q.mass(), q.q0(), q.kinetic(), q.quartic(), moment(q, p), lambda_of(q, p)};
  });
}

void gpelab_solver_options_default(gpelab_solver_options* out) {
  if (!out) return;
  const MinimizeOptions d;
  *out = {GPELAB_METHOD_CG, d.tolerance, d.energy_tolerance, d.max_iterations, d.initial_step, d.seed_width};
}

int gpelab_minimize(const gpelab_problem* problem, int components, double half_width, int n_points,
                    const gpelab_solver_options* options, gpelab_result** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = nullptr;
    require(components == 1 || components == 2, "components must be 1 or 2");
    MinimizeOptions o;
    if (options) {
      require(options->method == GPELAB_METHOD_CG || options->method == GPELAB_METHOD_GRADIENT_FLOW,
              "unknown method");
      o.method = options->method == GPELAB_METHOD_CG ? Method::ConjugateGradient : Method::GradientFlow;
      o.tolerance = options->tolerance;
      o.energy_tolerance = options->energy_tolerance;
      o.max_iterations = options->max_iterations;
      o.initial_step = options->initial_step;
      o.seed_width = options->seed_width;
    }
    const Grid2D grid(half_width, n_points);
    ProblemSpec spec{problem->a1, problem->a2, problem->beta, trap_of(problem->trap1), trap_of(problem->trap2)};
    SolveResult r = components == 1 ? minimize_single(spec.a1, spec.trap1, grid, o) : minimize_pair(spec, grid, o);
    *out = new gpelab_result{std::move(r)};
  });
}

int gpelab_result_summary(const gpelab_result* result, gpelab_summary* out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    const SolveResult& r = result->value;
    const bool two = r.components() == 2;
    *out = {};
    out->status = static_cast<int>(r.status);
    out->components = static_cast<int>(r.components());
    out->iterations = r.iterations;
    out->energy = r.energy;
    out->residual = r.residual;
    out->interaction = two ? r.interaction : 0.0;
    for (int i = 0; i < out->components; ++i) {
      out->mu[i] = r.mu[i];
      out->quartic[i] = r.quartic[i];
      out->component_energy[i] = two ? r.component_energy[i] : r.energy;
    }
  });
}

int gpelab_result_field(const gpelab_result* result, int component, gpelab_field** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    *out = nullptr;
    require(component >= 0 && static_cast<std::size_t>(component) < result->value.components(),
            "component out of range");
    *out = new gpelab_field{result->value.fields[component]};
  });
}

void gpelab_result_free(gpelab_result* result) { delete result; }

int gpelab_field_shape(const gpelab_field* field, int* n_points, double* half_width) {
  return guarded([&] {
    need(field, "field");
    if (n_points) *n_points = field->value.grid().points_per_side();
    if (half_width) *half_width = field->value.grid().half_width();
  });
}

int gpelab_field_values(const gpelab_field* field, double* buffer, size_t length) {
  return guarded([&] {
    need(field, "field");
    need(buffer, "buffer");
    require(length >= field->value.size(), "buffer too small");
    std::memcpy(buffer, field->value.data(), field->value.size() * sizeof(double));
  });
}

void gpelab_field_free(gpelab_field* field) { delete field; }

int gpelab_lemma_a(const gpelab_lemma_a_params* params, gpelab_lemma_a_result* out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    const LemmaAResult r = lemma_a_minimize({params->kappa, params->m, params->p, params->a, params->astar});
    *out = {r.s1, r.f_min, r.iterations, r.convex_at_iterates, r.bracket_lower, r.bracket_upper,
            r.bracket_holds, r.bound_ratio};
  });
}

int gpelab_fit_power_law(const double* x, const double* y, size_t n, size_t window, double r2_gate,
                         gpelab_power_law* out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    const PowerLawFit f = fit_power_law(std::vector<double>(x, x + n), std::vector<double>(y, y + n), window, r2_gate);
    *out = {f.exponent, f.log_prefactor, f.r_squared, f.first, f.count, f.accepted};
  });
}

int gpelab_resolve_config(const char* command, const char* user_json, char** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    *out = nullptr;
    *out = dup(resolve_config(command, parse_user(user_json)).dump(2));
  });
}

int gpelab_run_command(const char* command, const char* user_json, const gpelab_profile* profile,
                       gpelab_output** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    *out = nullptr;
    if (!known_command(command)) fail(ErrorCode::InvalidArgument, std::string("unknown command '") + command + "'");
    const Json cfg = resolve_config(command, parse_user(user_json));
    const std::string qref = cfg.contains("paths") ? cfg["paths"].value("q_reference", "") : "";
    if (profile) {
      *out = wrap(run_command(command, cfg, profile->value));
    } else if (!qref.empty()) {
      *out = wrap(run_command(command, cfg, profile_from_json(read_file(qref))));
    } else {
      *out = wrap(run_command(command, cfg, reference_profile()));
    }
  });
}

int gpelab_run_report(const char* sweep_csv, const char* manifest_json, const gpelab_profile* profile,
                      gpelab_output** out) {
  return guarded([&] {
    need(sweep_csv, "sweep_csv");
    need(manifest_json, "manifest_json");
    need(out, "out");
    *out = nullptr;
    *out = wrap(run_report(sweep_csv, manifest_json, profile ? profile->value : reference_profile()));
  });
}

int gpelab_output_status(const gpelab_output* output) { return output ? output->value.status : GPELAB_EXIT_CONFIG; }

size_t gpelab_output_file_count(const gpelab_output* output) { return output ? output->value.files.size() : 0; }

int gpelab_output_file(const gpelab_output* output, size_t index, const char** name, const char** data,
                       size_t* size) {
  return guarded([&] {
    need(output, "output");
    require(index < output->value.files.size(), "file index out of range");
    const auto& [n, c] = output->value.files[index];
    if (name) *name = n.c_str();
    if (data) *data = c.data();
    if (size) *size = c.size();
  });
}

const char* gpelab_output_summary(const gpelab_output* output) { return output ? output->summary.c_str() : ""; }

size_t gpelab_output_message_count(const gpelab_output* output) {
  return output ? output->value.messages.size() : 0;
}

const char* gpelab_output_message(const gpelab_output* output, size_t index) {
  if (!output || index >= output->value.messages.size()) return nullptr;
  return output->value.messages[index].c_str();
}

void gpelab_output_free(gpelab_output* output) { delete output; }

}  // extern "C"
