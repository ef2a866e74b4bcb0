#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/workflows.hpp"

using namespace gpelab;

namespace {

const RadialProfile& Q() { return reference_profile(); }

const std::string& file(const CommandOutput& o, const std::string& name) {
  for (const auto& [n, c] : o.files)
    if (n == name) return c;
  FAIL("missing output " << name);
  static std::string none;
  return none;
}

CommandOutput run(const std::string& cmd, const char* user) {
  return run_command(cmd, resolve_config(cmd, Json::parse(user)), Q());
}

// short pair sweep far from a*, coarse grid
const char* kSmallSweep = R"({
  "schedule": {"fractions": [0.5, 0.6, 0.7]},
  "grid": {"L": 6, "N": 64, "max_N": 128},
  "solver": {"tolerance": 1e-5}
})";

}  // namespace

TEST_CASE("manifest lists every output with its hash") {
  const CommandOutput o = run("single", R"({"grid":{"L":5,"N":64},"problem":{"a1_frac":0.5}})");
  CHECK(o.status == kExitOk);
  REQUIRE(!o.files.empty());
  CHECK(o.files.back().first == "manifest.json");
  const Json m = Json::parse(o.files.back().second);
  CHECK(m["schema"] == "gpelab.manifest/1");
  CHECK(m["version"] == kVersion);
  CHECK(m["command"] == "single");
  CHECK(m["config_hash"] == config_hash(m["config"]));
  CHECK(m["outputs"].size() == o.files.size() - 1);
  for (std::size_t k = 0; k + 1 < o.files.size(); ++k) {
    CHECK(m["outputs"][k]["name"] == o.files[k].first);
    CHECK(m["outputs"][k]["fnv1a"] == fnv1a_hex(o.files[k].second));
  }
  CHECK(m["astar"].get<double>() == Q().mass());
  const Json r = Json::parse(file(o, "result.json"));
  CHECK(r["status"] == "converged");
  CHECK(r["component1"]["peak_count"] == 1);
  CHECK(std::hypot(r["component1"]["peak"][0].get<double>(), r["component1"]["peak"][1].get<double>()) < 0.05);
  const Table cut = Table::from_csv(file(o, "cut.csv"));
  CHECK(cut.rows.size() == 64);
}

TEST_CASE("single reports not converged with exit 2") {
  const CommandOutput o = run("single", R"({"grid":{"L":5,"N":64},"solver":{"max_iterations":2}})");
  CHECK(o.status == kExitSolver);
  CHECK(!o.messages.empty());
}

TEST_CASE("pair writes both fields") {
  const CommandOutput o = run("pair", R"({"grid":{"L":5,"N":64},"problem":{"a1_frac":0.5,"a2_frac":0.5}})");
  CHECK(o.status == kExitOk);
  const Json r = Json::parse(file(o, "result.json"));
  CHECK(r["component1"]["peak"][0].get<double>() < 0.0);
  CHECK(r["component2"]["peak"][0].get<double>() > 0.0);
  CHECK(file(o, "u2.field").size() > 64u * 64u * 8u);
  CHECK(Table::from_csv(file(o, "cut.csv")).columns.size() == 4);
}

TEST_CASE("outputs are byte-identical across runs") {
  const CommandOutput a = run("pair", R"({"grid":{"L":5,"N":64},"problem":{"a1_frac":0.6,"a2_frac":0.5}})");
  const CommandOutput b = run("pair", R"({"grid":{"L":5,"N":64},"problem":{"a1_frac":0.6,"a2_frac":0.5}})");
  CHECK(a.files == b.files);
}

TEST_CASE("townes command checks identities") {
  const CommandOutput o = run("townes", "{}");
  CHECK(o.status == kExitOk);
  CHECK(o.summary["astar"].get<double>() == doctest::Approx(11.700896524556560).epsilon(1e-8));
  CHECK(o.summary["gn_residual"].get<double>() < 1e-6);
  CHECK(o.summary["step_halving"].get<double>() < 1e-4);
  const Table t = Table::from_csv(file(o, "constants.csv"));
  REQUIRE(t.rows.size() == 4);
  CHECK(t.column("lambda")[1] == doctest::Approx(1.930694487596).epsilon(1e-6));
  const RadialProfile back = profile_from_json(file(o, "townes.json"));
  CHECK(back.mass() == Q().mass());
}

TEST_CASE("sweep and report agree") {
  const Json cfg = resolve_config("sweep", Json::parse(kSmallSweep));
  const CommandOutput o = run_command("sweep", cfg, Q());
  // far from a* the asymptotic diagnostics are not expected to hold
  CHECK((o.status == kExitOk || o.status == kExitDiagnostics));
  const std::string& csv = file(o, "sweep.csv");
  const std::string& manifest = file(o, "manifest.json");
  const auto recs = sweep_records(Table::from_csv(csv));
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) CHECK(r.ok);
  const Json m = Json::parse(manifest);
  CHECK(m["schedule"].size() == 3);
  CHECK(m["schedule"][1]["a1"].get<double>() == 0.6 * Q().mass());
  const Json diag = Json::parse(file(o, "diagnostics.json"));
  CHECK(diag["kind"] == "theorem2");
  CHECK(diag.contains("l4_sandwich"));

  const CommandOutput rep = run_report(csv, manifest, Q());
  CHECK(rep.summary["hash_ok"] == true);
  CHECK(rep.summary["derived_mismatches"] == 0);
  CHECK(rep.summary["config_hash_matches"] == true);
  CHECK(rep.summary["diagnostics"] == diag);
  CHECK(rep.status == (o.status == kExitOk ? kExitOk : kExitDiagnostics));

  // a derived column edited by hand
  Table t = Table::from_csv(csv);
  const std::size_t c = t.column_index("eps_tilde1");
  t.rows[1][c] = format_double(parse_double(t.rows[1][c]) * (1.0 + 1e-15) + 1e-15);
  const CommandOutput bad = run_report(t.to_csv(), manifest, Q());
  CHECK(bad.status == kExitInvariant);
  CHECK(bad.summary["hash_ok"] == false);
  CHECK(bad.summary["derived_mismatches"] == 1);

  CHECK_THROWS_AS(run_report(csv, "{}", Q()), Error);
  CHECK_THROWS_AS(run_report(csv, "not json", Q()), Error);
}

TEST_CASE("sweep with a failing point exits 2") {
  const Json cfg = resolve_config("sweep", Json::parse(R"({
    "schedule": {"fractions": [0.5, 0.6]},
    "grid": {"L": 6, "N": 64, "max_N": 64},
    "solver": {"max_iterations": 2}
  })"));
  const CommandOutput o = run_command("sweep", cfg, Q());
  CHECK(o.status == kExitSolver);
  CHECK(o.messages.size() >= 2);
}

TEST_CASE("lemma-a command") {
  const CommandOutput o = run("lemma-a", "{}");
  CHECK(o.status == kExitOk);
  const Table t = Table::from_csv(file(o, "lemma_a.csv"));
  CHECK(t.rows.size() == 3u * 3u * 3u * 2u);
  CHECK(o.summary["increasing_in_m"] == true);
}

TEST_CASE("trial command") {
  const CommandOutput o = run("trial", R"({"trial":{"fractions":[0.98,0.99]}})");
  CHECK(o.status == kExitOk);
  const Table t = Table::from_csv(file(o, "trial.csv"));
  REQUIRE(t.rows.size() == 2);
  for (double r : t.column("ratio")) CHECK(r < 5.0);
}

TEST_CASE("unbounded command") {
  const CommandOutput o = run("unbounded", R"({"grid":{"N":1024}})");
  CHECK(o.status == kExitOk);
  const auto e = Table::from_csv(file(o, "unbounded.csv")).column("energy");
  REQUIRE(e.size() >= 2);
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] < e[k - 1]);
}

TEST_CASE("unknown command") {
  CHECK_THROWS_AS(run_command("report", Json::object(), Q()), Error);
}
