#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/svg.hpp"

using namespace gpelab;

namespace {

bool bits_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof a) == 0;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  const double vals[] = {0.0, -0.0, 1.0 / 3.0, 11.700896524556560, 1e-300, -2.5e300, 5e-324,
                         std::numeric_limits<double>::max()};
  for (double v : vals) CHECK(bits_equal(parse_double(format_double(v)), v));
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::isnan(parse_double("nan")));
  CHECK(parse_double("-inf") == -INFINITY);
  CHECK(code_of([] { parse_double("1.5x"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_double(""); }) == ErrorCode::Parse);
}

TEST_CASE("fnv1a matches published vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("table csv round trip") {
  Table t;
  t.schema = "demo/1";
  t.columns = {"a", "b"};
  t.add_row({"1", "x"});
  t.add_row({"2.5", "y"});
  const std::string csv = t.to_csv();
  CHECK(csv.rfind("# schema: demo/1\na,b\n", 0) == 0);
  const Table u = Table::from_csv(csv);
  CHECK(u.schema == "demo/1");
  CHECK(u.columns == t.columns);
  CHECK(u.rows == t.rows);
  CHECK(u.column("a") == std::vector<double>{1.0, 2.5});
  CHECK(u.to_csv() == csv);
  CHECK_THROWS_AS(t.add_row({"1"}), Error);
  CHECK_THROWS_AS(t.column_index("zzz"), Error);
  CHECK(code_of([] { Table::from_csv("a,b\n1,2\n"); }) == ErrorCode::Parse);
}

TEST_CASE("sweep records survive the csv bit for bit") {
  SweepRecord r;
  r.index = 3;
  r.a1 = 11.1;
  r.a2 = NAN;
  r.beta = 1.0;
  r.status = "converged";
  r.ok = true;
  r.half_width = 8;
  r.points = 512;
  r.iterations = 77;
  r.residual = 3.3e-7;
  r.e = 0.123456789012345678;
  r.e1 = 0.06;
  r.e2 = 0.061;
  r.overlap = 1e-9;
  r.quartic1 = 42.0;
  r.quartic2 = 43.0;
  r.peak1 = {-0.999, 1e-17};
  r.peak_count1 = 1;
  r.peak_refined1 = true;
  r.lambda_fit1 = 1.93;
  r.delta2 = -INFINITY;
  derive_columns(r, reference_profile().mass());
  const auto back = sweep_records(Table::from_csv(sweep_table({r}).to_csv()));
  REQUIRE(back.size() == 1);
  const SweepRecord& s = back[0];
  CHECK(s.index == 3);
  CHECK(s.status == "converged");
  CHECK(s.ok);
  CHECK(s.points == 512);
  CHECK(s.peak_refined1);
  CHECK(!s.peak_refined2);
  CHECK(bits_equal(s.a1, r.a1));
  CHECK(bits_equal(s.a2, r.a2));
  CHECK(bits_equal(s.e, r.e));
  CHECK(bits_equal(s.eps_tilde1, r.eps_tilde1));
  CHECK(bits_equal(s.sandwich_slack, r.sandwich_slack));
  CHECK(bits_equal(s.peak1.y, r.peak1.y));
  CHECK(bits_equal(s.delta2, r.delta2));
  CHECK(sweep_table({s}).to_csv() == sweep_table({r}).to_csv());
}

TEST_CASE("field dump round trip") {
  const Grid2D g(3.0, 32);
  const ScalarField f = sample(g, [](Point x) { return std::exp(-x.x * x.x) * std::sin(x.y) + 1e-310; });
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_field(buf, f, "u1");
  const std::string bytes = buf.str();
  CHECK(bytes.size() > 32u * 32u * 8u);
  const std::string header = bytes.substr(0, bytes.find('\n'));
  const Json h = Json::parse(header);
  CHECK(h["schema"] == "gpelab.field/1");
  CHECK(h["N"] == 32);
  CHECK(h["dtype"] == "float64-le");
  const ScalarField g2 = read_field(buf);
  REQUIRE(g2.grid().points_per_side() == 32);
  CHECK(g2.grid().half_width() == 3.0);
  bool same = true;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) same = same && bits_equal(g2.at(i, j), f.at(i, j));
  CHECK(same);

  std::stringstream trunc(bytes.substr(0, bytes.size() - 8), std::ios::in | std::ios::binary);
  CHECK(code_of([&] { read_field(trunc); }) == ErrorCode::Parse);
}

TEST_CASE("write_file replaces atomically") {
  const auto dir = std::filesystem::temp_directory_path() / "gpelab_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "x.txt").string();
  write_file(path, "one");
  write_file(path, "two\n");
  CHECK(read_file(path) == "two\n");
  CHECK(code_of([&] { read_file((dir / "missing").string()); }) != ErrorCode{0});
  std::filesystem::remove_all(dir);
}

TEST_CASE("config resolution") {
  for (const char* c : {"townes", "single", "pair", "sweep", "unbounded", "trial", "lemma-a"}) {
    CHECK(known_command(c));
    const Json r = resolve_config(c, Json::object());
    CHECK(r == default_config(c));
    CHECK(config_hash(r).size() == 16);
  }
  CHECK(!known_command("report"));

  const Json merged = resolve_config("pair", Json::parse(R"({"problem":{"beta":2.5},"grid":{"N":128}})"));
  CHECK(merged["problem"]["beta"] == 2.5);
  CHECK(merged["problem"]["a1_frac"] == 0.9);
  CHECK(merged["grid"]["N"] == 128);
  CHECK(merged["grid"]["L"] == 8.0);
  CHECK(config_hash(merged) != config_hash(default_config("pair")));

  const Json t3 = resolve_config("sweep", Json::parse(R"({"preset":"theorem3"})"));
  CHECK(t3["diagnostics"]["kind"] == "theorem3");
  CHECK(t3["problem"]["trap1"]["center"] == Json::array({0.0, 0.0}));
  CHECK(resolve_config("sweep", Json::parse(R"({"preset":"scaling"})"))["mode"] == "single");

  const Json geo = resolve_config("sweep", Json::parse(R"({"schedule":{"geometric":{"first_gap":0.1,"ratio":0.5,"count":4}}})"));
  const auto s = schedule_fractions(geo);
  REQUIRE(s.size() == 4);
  CHECK(s[3].first == doctest::Approx(1.0 - 0.1 / 8.0));
  CHECK(!geo["schedule"].contains("fractions"));
  const auto pairs = schedule_fractions(resolve_config("sweep", Json::parse(R"({"schedule":{"pairs":[[0.9,0.95]]}})")));
  CHECK(pairs == std::vector<std::pair<double, double>>{{0.9, 0.95}});

  const double astar = reference_profile().mass();
  const SweepConfig sc = sweep_from(resolve_config("sweep", Json::object()), astar);
  CHECK(sc.schedule.size() == 5);
  CHECK(sc.schedule[0].first == doctest::Approx(0.9 * astar));
  CHECK(sc.grid.max_points == 1024);
  const MinimizeOptions mo = solver_from(default_config("single"));
  CHECK(mo.method == Method::ConjugateGradient);
  CHECK(mo.initial_step == 0.1);
}

TEST_CASE("config errors are InvalidArgument") {
  auto bad = [](const std::string& cmd, const char* text) {
    return code_of([&] { resolve_config(cmd, Json::parse(text)); });
  };
  CHECK(bad("pair", R"({"problem":{"bogus":1}})") == ErrorCode::InvalidArgument);
  CHECK(bad("pair", R"({"grid":{"N":33}})") == ErrorCode::InvalidArgument);
  CHECK(bad("pair", R"({"problem":{"a1_frac":1.2}})") == ErrorCode::InvalidArgument);
  CHECK(bad("pair", R"({"problem":{"beta":"x"}})") == ErrorCode::InvalidArgument);
  CHECK(bad("pair", R"({"preset":"theorem3"})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"preset":"nope"})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"schedule":{"fractions":[0.9,1.0]}})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"schedule":{"weird":[0.9]}})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"schedule":{"fractions":[0.9],"pairs":[[0.9,0.9]]}})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"jobs":0})") == ErrorCode::InvalidArgument);
  CHECK(bad("sweep", R"({"solver":{"method":"newton"}})") == ErrorCode::InvalidArgument);
  CHECK(bad("townes", R"({"townes":{"tolerance":1e-3}})") == ErrorCode::InvalidArgument);
  CHECK(bad("townes", R"({"townes":{"r_max":10}})") == ErrorCode::InvalidArgument);
  CHECK(bad("unbounded", R"({"unbounded":{"a1_frac":0.9}})") == ErrorCode::InvalidArgument);
  CHECK(bad("lemma-a", R"({"lemma_a":{"a_frac":[1.0]}})") == ErrorCode::InvalidArgument);
  CHECK(code_of([] { resolve_config("pair", Json::array()); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { resolve_config("frobnicate", Json::object()); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("svg output is deterministic and skips unusable points") {
  Plot p{"t <1>", "x", "y", true, true, {{"s", {1.0, 10.0, -1.0, NAN}, {1.0, 100.0, 5.0, 1.0}}}};
  const std::string a = render_svg(p);
  CHECK(a == render_svg(p));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("t &lt;1&gt;") != std::string::npos);
  CHECK(a.find("nan") == std::string::npos);
  std::size_t circles = 0;
  for (std::size_t pos = 0; (pos = a.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
  CHECK(circles == 2);
  CHECK(render_svg(Plot{}).find("</svg>") != std::string::npos);
}
