#include "core/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "json.hpp"

namespace gpelab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& t) {
  if (t == "nan") return std::nan("");
  if (t == "inf") return HUGE_VAL;
  if (t == "-inf") return -HUGE_VAL;
  if (t.empty()) fail(ErrorCode::Parse, "empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) fail(ErrorCode::Parse, "bad number '" + t + "'");
  return v;
}

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == columns.size(), "row width differs from the header");
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  fail(ErrorCode::Parse, "no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(parse_double(r[k]));
  return out;
}

std::string Table::to_csv() const {
  std::string s = "# schema: " + schema + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) s += ',';
      s += cells[k];
    }
    s += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return s;
}

Table Table::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line) || line.rfind("# schema: ", 0) != 0)
    fail(ErrorCode::Parse, "missing schema line");
  t.schema = line.substr(10);
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "missing header row");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size()) fail(ErrorCode::Parse, "ragged row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace {

const char* const kSweepSchema = "gpelab.sweep/1";

const std::vector<std::string> kSweepColumns = {
    "index", "status", "ok", "under_resolved", "L", "N", "iterations", "residual",
    "a1", "a2", "beta", "p1", "p2", "eps1", "eps2", "quartic1", "quartic2",
    "eps_tilde1", "eps_tilde2", "e", "E1", "E2", "e1", "e2", "overlap", "sandwich_slack",
    "mu1", "mu2", "x_peak1", "y_peak1", "x_peak2", "y_peak2", "peak_count1", "peak_count2",
    "peak_refined1", "peak_refined2", "lambda_fit1", "lambda_fit2", "profile_dist1",
    "profile_dist2", "delta1", "delta2"};

}  // namespace

Table sweep_table(const std::vector<SweepRecord>& records) {
  Table t;
  t.schema = kSweepSchema;
  t.columns = kSweepColumns;
  auto d = format_double;
  auto i = [](long v) { return std::to_string(v); };
  for (const auto& r : records) {
    t.add_row({i(r.index), r.status, i(r.ok), i(r.under_resolved), d(r.half_width), i(r.points),
               i(r.iterations), d(r.residual), d(r.a1), d(r.a2), d(r.beta), d(r.p1), d(r.p2),
               d(r.eps1), d(r.eps2), d(r.quartic1), d(r.quartic2), d(r.eps_tilde1),
               d(r.eps_tilde2), d(r.e), d(r.E1), d(r.E2), d(r.e1), d(r.e2), d(r.overlap),
               d(r.sandwich_slack), d(r.mu1), d(r.mu2), d(r.peak1.x), d(r.peak1.y), d(r.peak2.x),
               d(r.peak2.y), i(r.peak_count1), i(r.peak_count2), i(r.peak_refined1),
               i(r.peak_refined2), d(r.lambda_fit1), d(r.lambda_fit2), d(r.profile_dist1),
               d(r.profile_dist2), d(r.delta1), d(r.delta2)});
  }
  return t;
}

std::vector<SweepRecord> sweep_records(const Table& t) {
  if (t.schema != kSweepSchema) fail(ErrorCode::Parse, "not a sweep table: " + t.schema);
  if (t.columns != kSweepColumns) fail(ErrorCode::Parse, "sweep columns do not match");
  std::vector<SweepRecord> out;
  for (const auto& row : t.rows) {
    std::size_t k = 0;
    auto d = [&] { return parse_double(row[k++]); };
    auto i = [&] {
      const double v = parse_double(row[k++]);
      if (v != std::floor(v)) fail(ErrorCode::Parse, "expected an integer");
      return static_cast<int>(v);
    };
    SweepRecord r;
    r.index = i();
    r.status = row[k++];
    r.ok = i() != 0;
    r.under_resolved = i() != 0;
    r.half_width = d();
    r.points = i();
    r.iterations = i();
    r.residual = d();
    r.a1 = d(); r.a2 = d(); r.beta = d(); r.p1 = d(); r.p2 = d();
    r.eps1 = d(); r.eps2 = d(); r.quartic1 = d(); r.quartic2 = d();
    r.eps_tilde1 = d(); r.eps_tilde2 = d();
    r.e = d(); r.E1 = d(); r.E2 = d(); r.e1 = d(); r.e2 = d();
    r.overlap = d(); r.sandwich_slack = d(); r.mu1 = d(); r.mu2 = d();
    r.peak1.x = d(); r.peak1.y = d(); r.peak2.x = d(); r.peak2.y = d();
    r.peak_count1 = i(); r.peak_count2 = i();
    r.peak_refined1 = i() != 0; r.peak_refined2 = i() != 0;
    r.lambda_fit1 = d(); r.lambda_fit2 = d();
    r.profile_dist1 = d(); r.profile_dist2 = d();
    r.delta1 = d(); r.delta2 = d();
    out.push_back(std::move(r));
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_field(std::ostream& out, const ScalarField& f, const std::string& label) {
  const Grid2D& g = f.grid();
  nlohmann::json h;
  h["schema"] = "gpelab.field/1";
  h["label"] = label;
  h["N"] = g.points_per_side();
  h["L"] = g.half_width();
  h["h"] = g.spacing();
  h["origin"] = -g.half_width();
  h["order"] = "row-major, index = ix*N + iy, x = origin + ix*h";
  h["dtype"] = "float64-le";
  out << h.dump() << '\n';
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char b[8];
    std::memcpy(b, &bits, 8);
    out.write(b, 8);
  }
  if (!out) fail(ErrorCode::Io, "field write failed");
}

ScalarField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "missing field header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("field header: ") + e.what());
  }
  if (h.value("schema", "") != "gpelab.field/1" || h.value("dtype", "") != "float64-le")
    fail(ErrorCode::Parse, "unsupported field header");
  int n = 0;
  double L = 0.0;
  try {
    n = h.at("N").get<int>();
    L = h.at("L").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("field header: ") + e.what());
  }
  ScalarField f(Grid2D(L, n));
  for (double& v : f.values()) {
    char b[8];
    if (!in.read(b, 8)) fail(ErrorCode::Parse, "truncated field data");
    std::uint64_t bits;
    std::memcpy(&bits, b, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    out << contents;
    if (!out) fail(ErrorCode::Io, "write failed: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "rename failed: " + path);
}

}  // namespace gpelab
