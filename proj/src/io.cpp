#include "isolab/io.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace isolab {

namespace {

using nlohmann::json;

const std::map<std::string, std::pair<Family, std::vector<std::string>>>& family_table() {
  static const std::map<std::string, std::pair<Family, std::vector<std::string>>> table{
      {"gaussian", {Family::gaussian, {"mean", "variance"}}},
      {"laplace_smoothed", {Family::laplace_smoothed, {"scale", "smoothing"}}},
      {"logistic", {Family::logistic, {"scale"}}},
      {"interp_curvature", {Family::interp_curvature, {"k_left", "k_right", "width"}}},
      {"custom", {Family::custom, {"x", "v"}}},
  };
  return table;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw SpecError("measure spec: unknown key '" + where + key + "'");
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw SpecError("measure spec: '" + field + "' must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) throw SpecError("measure spec: '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(number(e, field));
  return out;
}

}  // namespace

MeasureSpec parse_measure_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("measure spec: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("measure spec: top level must be an object");
  reject_unknown(doc, {"family", "params", "grid_nodes", "support"}, "");

  if (!doc.contains("family") || !doc["family"].is_string())
    throw SpecError("measure spec: 'family' must be a string");
  const std::string family = doc["family"].get<std::string>();
  const auto it = family_table().find(family);
  if (it == family_table().end()) throw SpecError("measure spec: unknown family '" + family + "'");
  const auto& [tag_family, names] = it->second;

  MeasureSpec spec;
  spec.tag.family = tag_family;
  const json params = doc.value("params", json::object());
  if (!params.is_object()) throw SpecError("measure spec: 'params' must be an object");
  reject_unknown(params, std::set<std::string>(names.begin(), names.end()), "params.");
  for (const std::string& name : names)
    if (!params.contains(name)) throw SpecError("measure spec: missing 'params." + name + "'");
  if (tag_family == Family::custom) {
    spec.xs = numbers(params["x"], "params.x");
    spec.vs = numbers(params["v"], "params.v");
  } else {
    for (const std::string& name : names) spec.tag.params.push_back(number(params[name], "params." + name));
  }

  if (doc.contains("grid_nodes")) {
    const json& g = doc["grid_nodes"];
    if (!g.is_number_integer() || g.get<long>() < 3)
      throw SpecError("measure spec: 'grid_nodes' must be an integer >= 3");
    spec.options.grid_nodes = g.get<int>();
  }
  if (doc.contains("support")) {
    const std::vector<double> s = numbers(doc["support"], "support");
    if (s.size() != 2 || !(s[0] < s[1])) throw SpecError("measure spec: 'support' must be [lo, hi] with lo < hi");
    spec.options.support = std::make_pair(s[0], s[1]);
  }
  return spec;
}

MeasureSpec load_measure_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("measure spec: cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_measure_spec(buf.str());
}

ReferenceMeasure build_measure(const MeasureSpec& spec) {
  if (spec.tag.family == Family::custom) return ReferenceMeasure::custom(spec.xs, spec.vs, spec.options);
  return ReferenceMeasure::from_tag(spec.tag, spec.options);
}

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw ContractError("CsvTable: row width differs from header");
  rows.push_back(std::move(row));
}

void CsvTable::add_numbers(const std::vector<double>& row) {
  std::vector<std::string> cells;
  for (double x : row) cells.push_back(format_number(x));
  add(std::move(cells));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table, bool timestamp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write '" + path.string() + "'");
  out << "# schema: v1\n";
  if (timestamp) out << "# generated: " << utc_timestamp() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw SpecError("write failed for '" + path.string() + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace isolab
