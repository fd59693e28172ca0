#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cgoh/fields.hpp"
#include "json.hpp"

namespace cgoh {

inline constexpr const char* kVersion = "cgoh " CGOH_VERSION;

enum class Compare { AtMost, AtLeast, Equal };

struct Criterion {
  std::string id;           // e.g. "dbar.inversion_error"
  std::string description;
  double value = 0.0;
  double threshold = 0.0;
  Compare compare = Compare::AtMost;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();

  static Criterion check(std::string id, std::string description, double value, Compare c, double threshold);
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // Plot hint for the manifest: column names of x and y, log axes.
  std::string x, y;
  bool logx = false, logy = false;
};

struct FieldDump {
  std::string name;
  std::string role;
  std::variant<ScalarField, VectorField3> field;
};

struct SuiteResult {
  std::string suite;
  std::vector<Criterion> criteria;
  std::vector<Table> tables;
  std::vector<FieldDump> fields;
  nlohmann::json summary = nlohmann::json::object();
  double seconds = 0.0;  // written to timings.json only
  bool pass() const;
};

struct ReportHeader {
  std::string subcommand;
  std::string scenario_name;
  std::string scenario_hash;
  std::uint64_t seed = 0;
};

// Writes report.json, one CSV per table, plots.json, field dumps, and
// timings.json (the only file that varies between identical runs).
void write_artifacts(const std::string& dir, const ReportHeader& header, const std::vector<SuiteResult>& results);

// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace cgoh
