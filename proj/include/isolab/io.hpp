#pragma once

#include "isolab/measures.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace isolab {

/// Malformed input file; the message names the offending field.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeasureSpec {
  FamilyTag tag;
  MeasureOptions options;
  std::vector<double> xs, vs;  // custom potential table
};

/// {"family": ..., "params": {...}, "grid_nodes": N, "support": [lo, hi]}
/// Unknown keys are rejected.
MeasureSpec parse_measure_spec(const std::string& text);
MeasureSpec load_measure_spec(const std::filesystem::path& path);
ReferenceMeasure build_measure(const MeasureSpec& spec);

/// Shortest round-trip representation, so reruns are byte-identical.
std::string format_number(double x);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void add_numbers(const std::vector<double>& row);
};

/// Writes "# schema: v1", an optional "# generated: ..." line, the header and rows.
void write_csv(const std::filesystem::path& path, const CsvTable& table, bool timestamp);

/// ISO-8601 UTC time of the call.
std::string utc_timestamp();

}  // namespace isolab
