#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "gpelab.h"

TEST_CASE("version and error names") {
  CHECK(std::string(gpelab_version()) == "1.0.0");
  CHECK(std::string(gpelab_error_name(GPELAB_E_OUT_OF_REGIME)) == "OutOfRegime");
  CHECK(std::string(gpelab_error_name(GPELAB_E_INTERNAL)) == "Internal");
  CHECK(std::string(gpelab_error_name(77)) == "Unknown");
}

TEST_CASE("profile handle") {
  gpelab_profile* q = nullptr;
  REQUIRE(gpelab_profile_reference(&q) == GPELAB_OK);
  gpelab_constants c{};
  REQUIRE(gpelab_profile_constants(q, 2.0, &c) == GPELAB_OK);
  CHECK(c.astar == doctest::Approx(11.700896524556560).epsilon(1e-9));
  CHECK(c.lambda == doctest::Approx(1.930694487596).epsilon(1e-8));
  CHECK(c.kinetic == doctest::Approx(c.astar).epsilon(1e-9));
  double v = 0;
  CHECK(gpelab_profile_value(q, 0.0, &v) == GPELAB_OK);
  CHECK(v == c.q0);
  CHECK(gpelab_profile_value(q, -1.0, &v) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(std::string(gpelab_last_error()).find("r must be") != std::string::npos);

  char* text = nullptr;
  REQUIRE(gpelab_profile_to_json(q, &text) == GPELAB_OK);
  gpelab_profile* back = nullptr;
  REQUIRE(gpelab_profile_from_json(text, &back) == GPELAB_OK);
  gpelab_constants c2{};
  gpelab_profile_constants(back, 2.0, &c2);
  CHECK(c2.astar == c.astar);
  gpelab_string_free(text);
  gpelab_profile_free(back);
  gpelab_profile_free(q);

  gpelab_profile* bad = nullptr;
  CHECK(gpelab_profile_from_json("{", &bad) == GPELAB_E_PARSE);
  CHECK(bad == nullptr);
  CHECK(gpelab_profile_reference(nullptr) == GPELAB_E_INVALID_ARGUMENT);
}

TEST_CASE("harmonic minimizer through the C API") {
  gpelab_problem p{};
  p.trap1 = {0.0, 0.0, 2.0};
  gpelab_solver_options o;
  gpelab_solver_options_default(&o);
  o.tolerance = 1e-8;
  gpelab_result* r = nullptr;
  REQUIRE(gpelab_minimize(&p, 1, 8.0, 64, &o, &r) == GPELAB_OK);
  gpelab_summary s{};
  REQUIRE(gpelab_result_summary(r, &s) == GPELAB_OK);
  CHECK(s.status == GPELAB_CONVERGED);
  CHECK(s.components == 1);
  CHECK(s.energy == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.mu[0] == doctest::Approx(2.0).epsilon(1e-6));

  gpelab_field* f = nullptr;
  REQUIRE(gpelab_result_field(r, 0, &f) == GPELAB_OK);
  int n = 0;
  double L = 0;
  gpelab_field_shape(f, &n, &L);
  CHECK(n == 64);
  CHECK(L == 8.0);
  std::vector<double> buf(static_cast<std::size_t>(n) * n);
  CHECK(gpelab_field_values(f, buf.data(), 10) == GPELAB_E_INVALID_ARGUMENT);
  REQUIRE(gpelab_field_values(f, buf.data(), buf.size()) == GPELAB_OK);
  const double h = 2 * L / n;
  double mass = 0;
  for (double u : buf) mass += u * u * h * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // Gaussian ground state peaks at the origin: index (n/2, n/2)
  CHECK(buf[static_cast<std::size_t>(n / 2) * n + n / 2] == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-6));
  gpelab_field_free(f);

  gpelab_field* none = nullptr;
  CHECK(gpelab_result_field(r, 1, &none) == GPELAB_E_INVALID_ARGUMENT);
  gpelab_result_free(r);

  CHECK(gpelab_minimize(&p, 3, 8.0, 64, &o, &r) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(gpelab_minimize(&p, 1, 8.0, 63, &o, &r) != GPELAB_OK);
}

TEST_CASE("lemma A and power-law fit") {
  gpelab_profile* q = nullptr;
  gpelab_profile_reference(&q);
  gpelab_constants c{};
  gpelab_profile_constants(q, 2.0, &c);
  gpelab_profile_free(q);
  gpelab_lemma_a_params lp{1e5, 100, 2, 0.99 * c.astar, c.astar};
  gpelab_lemma_a_result lr{};
  REQUIRE(gpelab_lemma_a(&lp, &lr) == GPELAB_OK);
  CHECK(lr.s1 > std::exp(3.0));
  CHECK(lr.bracket_holds == 1);
  gpelab_lemma_a_params far{1.0, 1.0, 2, 0.5 * c.astar, c.astar};
  CHECK(gpelab_lemma_a(&far, &lr) == GPELAB_E_OUT_OF_REGIME);

  const double x[] = {1, 2, 4, 8};
  const double y[] = {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)};
  gpelab_power_law f{};
  REQUIRE(gpelab_fit_power_law(x, y, 4, 0, 0.98, &f) == GPELAB_OK);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(f.log_prefactor) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.accepted == 1);
  CHECK(gpelab_fit_power_law(x, y, 2, 0, 0.98, &f) == GPELAB_E_DEGENERATE_INPUT);
}

TEST_CASE("commands through the C API") {
  char* cfg = nullptr;
  REQUIRE(gpelab_resolve_config("sweep", "{\"preset\":\"theorem3\"}", &cfg) == GPELAB_OK);
  CHECK(std::string(cfg).find("\"theorem3\"") != std::string::npos);
  gpelab_string_free(cfg);

  gpelab_output* out = nullptr;
  CHECK(gpelab_run_command("single", "{\"grid\":{\"N\":31}}", nullptr, &out) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(out == nullptr);
  CHECK(gpelab_run_command("single", "{not json", nullptr, &out) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(gpelab_run_command("nope", nullptr, nullptr, &out) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(gpelab_run_command("single", "{\"paths\":{\"q_reference\":\"/nonexistent/q.json\"}}", nullptr, &out) ==
        GPELAB_E_IO);

  REQUIRE(gpelab_run_command("lemma-a", nullptr, nullptr, &out) == GPELAB_OK);
  CHECK(gpelab_output_status(out) == GPELAB_EXIT_OK);
  REQUIRE(gpelab_output_file_count(out) == 3);
  const char* name = nullptr;
  const char* data = nullptr;
  std::size_t size = 0;
  REQUIRE(gpelab_output_file(out, 0, &name, &data, &size) == GPELAB_OK);
  CHECK(std::string(name) == "lemma_a.csv");
  CHECK(std::string(data, size).rfind("# schema: gpelab.lemma_a/1\n", 0) == 0);
  gpelab_output_file(out, 2, &name, nullptr, nullptr);
  CHECK(std::string(name) == "manifest.json");
  CHECK(gpelab_output_file(out, 3, &name, &data, &size) == GPELAB_E_INVALID_ARGUMENT);
  CHECK(std::string(gpelab_output_summary(out)).find("increasing_in_m") != std::string::npos);
  CHECK(gpelab_output_message(out, 0) == nullptr);
  gpelab_output_free(out);

  CHECK(gpelab_run_report("x", "{}", nullptr, &out) == GPELAB_E_PARSE);
}
