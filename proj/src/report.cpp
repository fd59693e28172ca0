#include "cgoh/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "cgoh/field_io.hpp"

namespace cgoh {

Criterion Criterion::check(std::string id, std::string description, double value, Compare c, double threshold) {
  Criterion out;
  out.id = std::move(id);
  out.description = std::move(description);
  out.value = value;
  out.threshold = threshold;
  out.compare = c;
  switch (c) {
    case Compare::AtMost: out.pass = value <= threshold; break;
    case Compare::AtLeast: out.pass = value >= threshold; break;
    case Compare::Equal: out.pass = value == threshold; break;
  }
  return out;
}

bool SuiteResult::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

const char* compare_name(Compare c) {
  switch (c) {
    case Compare::AtMost: return "<=";
    case Compare::AtLeast: return ">=";
    case Compare::Equal: return "==";
  }
  return "?";
}

// JSON numbers must be finite.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  os << text;
}

}  // namespace

void write_artifacts(const std::string& dir, const ReportHeader& header, const std::vector<SuiteResult>& results) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json report;
  report["tool"] = kVersion;
  report["subcommand"] = header.subcommand;
  report["scenario"] = {{"name", header.scenario_name}, {"hash", header.scenario_hash}};
  report["seed"] = header.seed;
  nlohmann::json suites = nlohmann::json::array();
  nlohmann::json plots = nlohmann::json::array();
  nlohmann::json timings = nlohmann::json::object();
  bool all = true;
  for (const auto& r : results) {
    nlohmann::json js;
    js["suite"] = r.suite;
    js["pass"] = r.pass();
    all = all && r.pass();
    nlohmann::json crit = nlohmann::json::array();
    for (const auto& c : r.criteria) {
      nlohmann::json jc;
      jc["id"] = c.id;
      jc["description"] = c.description;
      jc["value"] = number(c.value);
      jc["comparison"] = compare_name(c.compare);
      jc["threshold"] = number(c.threshold);
      jc["pass"] = c.pass;
      if (!c.detail.empty()) jc["detail"] = c.detail;
      crit.push_back(jc);
    }
    js["criteria"] = crit;
    if (!r.summary.empty()) js["summary"] = r.summary;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& t : r.tables) {
      const std::string name = r.suite + "_" + t.name + ".csv";
      std::string text;
      for (std::size_t c = 0; c < t.columns.size(); ++c) text += (c ? "," : "") + t.columns[c];
      text += "\n";
      for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + format_number(row[c]);
        text += "\n";
      }
      write_text(fs::path(dir) / name, text);
      files.push_back(name);
      if (!t.x.empty() && !t.y.empty())
        plots.push_back({{"csv", name}, {"x", t.x}, {"y", t.y}, {"logx", t.logx}, {"logy", t.logy},
                         {"title", r.suite + ": " + t.name}});
    }
    for (const auto& f : r.fields) {
      const std::string name = r.suite + "_" + f.name + ".cgf";
      const nlohmann::json meta = {{"role", f.role}, {"scenario_hash", header.scenario_hash}, {"tool", kVersion}};
      const std::string path = (fs::path(dir) / name).string();
      if (std::holds_alternative<ScalarField>(f.field))
        io::write_field(path, std::get<ScalarField>(f.field), meta);
      else
        io::write_field(path, std::get<VectorField3>(f.field), meta);
      files.push_back(name);
    }
    js["files"] = files;
    suites.push_back(js);
    timings[r.suite] = r.seconds;
  }
  report["suites"] = suites;
  report["pass"] = all;
  write_text(fs::path(dir) / "report.json", report.dump(2) + "\n");
  write_text(fs::path(dir) / "plots.json", nlohmann::json({{"plots", plots}}).dump(2) + "\n");
  write_text(fs::path(dir) / "timings.json", timings.dump(2) + "\n");
}

}  // namespace cgoh
