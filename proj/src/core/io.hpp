#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/asymptotics.hpp"
#include "core/grid.hpp"

namespace gpelab {

inline constexpr const char* kVersion = "1.0.0";

/// %.17g, with "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);
/// Inverse of format_double; Parse error on junk.
double parse_double(const std::string& text);

/// Comma-separated table headed by "# schema: <name>" and a column row.
struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::string to_csv() const;
  static Table from_csv(const std::string& text);
};

Table sweep_table(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> sweep_records(const Table& table);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// One JSON header line, then N*N little-endian float64 values, row-major
/// (index = ix*N + iy).
void write_field(std::ostream& out, const ScalarField& field, const std::string& label = "");
ScalarField read_field(std::istream& in);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_file(const std::string& path, const std::string& contents);

}  // namespace gpelab
