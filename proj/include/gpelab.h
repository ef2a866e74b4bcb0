#ifndef GPELAB_H
#define GPELAB_H

#include <stddef.h>

#if defined(_WIN32)
#define GPELAB_API __declspec(dllexport)
#else
#define GPELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning int returns one of these. On failure the message
   is available from gpelab_last_error() on the same thread. */
enum {
  GPELAB_OK = 0,
  GPELAB_E_INVALID_ARGUMENT = 1,
  GPELAB_E_ZERO_FIELD = 2,
  GPELAB_E_NO_BRACKET = 3,
  GPELAB_E_NOT_CONVERGED = 4,
  GPELAB_E_OUT_OF_RANGE = 5,
  GPELAB_E_GRID_MISMATCH = 6,
  GPELAB_E_UNDER_RESOLVED = 7,
  GPELAB_E_OUT_OF_REGIME = 8,
  GPELAB_E_TAIL_UNRESOLVED = 9,
  GPELAB_E_DEGENERATE_INPUT = 10,
  GPELAB_E_INSUFFICIENT_POINTS = 11,
  GPELAB_E_COLLAPSE_DETECTED = 12,
  GPELAB_E_IO = 13,
  GPELAB_E_PARSE = 14,
  GPELAB_E_INTERNAL = 100
};

/* Command exit statuses reported by gpelab_output_status. */
enum {
  GPELAB_EXIT_OK = 0,
  GPELAB_EXIT_CONFIG = 1,
  GPELAB_EXIT_SOLVER = 2,
  GPELAB_EXIT_INVARIANT = 3,
  GPELAB_EXIT_DIAGNOSTICS = 4
};

typedef struct gpelab_profile gpelab_profile;
typedef struct gpelab_result gpelab_result;
typedef struct gpelab_field gpelab_field;
typedef struct gpelab_output gpelab_output;

GPELAB_API const char* gpelab_version(void);
GPELAB_API const char* gpelab_last_error(void);
GPELAB_API const char* gpelab_error_name(int code);
/* Frees strings returned through char** out-parameters. */
GPELAB_API void gpelab_string_free(char* s);

/* ---- ground state ---- */

GPELAB_API int gpelab_profile_solve(double tolerance, double r_max, double step, gpelab_profile** out);
/* Process-wide reference profile (default options), computed once. */
GPELAB_API int gpelab_profile_reference(gpelab_profile** out);
GPELAB_API int gpelab_profile_from_json(const char* text, gpelab_profile** out);
GPELAB_API int gpelab_profile_to_json(const gpelab_profile* profile, char** out);
GPELAB_API void gpelab_profile_free(gpelab_profile* profile);
GPELAB_API int gpelab_profile_value(const gpelab_profile* profile, double r, double* out);

typedef struct {
  double astar;  /* mass of Q */
  double q0;
  double kinetic;
  double quartic;
  double moment;  /* int |x|^p Q^2 */
  double lambda;  /* (p m_p / 2)^{1/(p+2)} */
} gpelab_constants;

GPELAB_API int gpelab_profile_constants(const gpelab_profile* profile, double p, gpelab_constants* out);

/* ---- minimizers ---- */

typedef struct {
  double center_x, center_y;
  double p;
} gpelab_trap;

typedef struct {
  double a1, a2;
  double beta;
  gpelab_trap trap1, trap2;
} gpelab_problem;

enum { GPELAB_METHOD_CG = 0, GPELAB_METHOD_GRADIENT_FLOW = 1 };

typedef struct {
  int method;
  double tolerance;
  double energy_tolerance;
  int max_iterations;
  double initial_step;
  double seed_width;
} gpelab_solver_options;

GPELAB_API void gpelab_solver_options_default(gpelab_solver_options* out);

enum { GPELAB_CONVERGED = 0, GPELAB_NOT_CONVERGED = 1, GPELAB_COLLAPSE_DETECTED = 2 };

typedef struct {
  int status;
  int components;
  int iterations;
  double energy;
  double residual;
  double interaction; /* int u1^2 u2^2 */
  double mu[2];
  double quartic[2];
  double component_energy[2];
} gpelab_summary;

/* components = 1 uses a1 and trap1 only. Grid is [-half_width, half_width)^2
   with n_points per side. A non-converged run still returns a result;
   check summary.status. */
GPELAB_API int gpelab_minimize(const gpelab_problem* problem, int components, double half_width, int n_points,
                               const gpelab_solver_options* options, gpelab_result** out);
GPELAB_API int gpelab_result_summary(const gpelab_result* result, gpelab_summary* out);
GPELAB_API int gpelab_result_field(const gpelab_result* result, int component, gpelab_field** out);
GPELAB_API void gpelab_result_free(gpelab_result* result);

GPELAB_API int gpelab_field_shape(const gpelab_field* field, int* n_points, double* half_width);
/* Copies n_points^2 values, index ix * n_points + iy. */
GPELAB_API int gpelab_field_values(const gpelab_field* field, double* buffer, size_t length);
GPELAB_API void gpelab_field_free(gpelab_field* field);

/* ---- small numerics ---- */

typedef struct {
  double kappa, m, p, a, astar;
} gpelab_lemma_a_params;

typedef struct {
  double s1;
  double f_min;
  int iterations;
  int convex_at_iterates;
  double bracket_lower, bracket_upper;
  int bracket_holds;
  double bound_ratio;
} gpelab_lemma_a_result;

GPELAB_API int gpelab_lemma_a(const gpelab_lemma_a_params* params, gpelab_lemma_a_result* out);

typedef struct {
  double exponent;
  double log_prefactor;
  double r_squared;
  size_t first, count;
  int accepted;
} gpelab_power_law;

GPELAB_API int gpelab_fit_power_law(const double* x, const double* y, size_t n, size_t window, double r2_gate,
                                    gpelab_power_law* out);

/* ---- commands ---- */

/* Resolved config (defaults + preset + user document) as JSON. */
GPELAB_API int gpelab_resolve_config(const char* command, const char* user_json, char** out);

/* Runs townes, single, pair, sweep, unbounded, trial or lemma-a. user_json
   may be NULL. profile NULL means paths.q_reference if set, else the
   reference profile. Config errors return GPELAB_E_INVALID_ARGUMENT and no
   output. */
GPELAB_API int gpelab_run_command(const char* command, const char* user_json, const gpelab_profile* profile,
                                  gpelab_output** out);
/* Re-derives a stored sweep (sweep.csv + manifest.json contents). */
GPELAB_API int gpelab_run_report(const char* sweep_csv, const char* manifest_json, const gpelab_profile* profile,
                                 gpelab_output** out);

GPELAB_API int gpelab_output_status(const gpelab_output* output);
GPELAB_API size_t gpelab_output_file_count(const gpelab_output* output);
/* Pointers stay valid until gpelab_output_free. */
GPELAB_API int gpelab_output_file(const gpelab_output* output, size_t index, const char** name, const char** data,
                                  size_t* size);
GPELAB_API const char* gpelab_output_summary(const gpelab_output* output);
GPELAB_API size_t gpelab_output_message_count(const gpelab_output* output);
GPELAB_API const char* gpelab_output_message(const gpelab_output* output, size_t index);
GPELAB_API void gpelab_output_free(gpelab_output* output);

#ifdef __cplusplus
}
#endif

#endif
