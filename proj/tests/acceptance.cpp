// Runs the cgoh tool on the shipped scenarios and prints one line per
// acceptance criterion. Thresholds are fixed here, independently of the
// thresholds the tool writes into its reports.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  double wall = 0.0;
  json report;
  json timings;
  fs::path dir;
  std::string error;

  const json* criterion(const std::string& id) const {
    if (!report.is_object() || !report.contains("suites")) return nullptr;
    for (const auto& s : report["suites"])
      for (const auto& c : s["criteria"])
        if (c["id"] == id) return &c;
    return nullptr;
  }
  double suite_seconds(const std::string& suite) const {
    return timings.is_object() && timings.contains(suite) ? timings[suite].get<double>() : -1.0;
  }
};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return json();
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return json();
  }
}

class Harness {
 public:
  Harness(std::string tool, fs::path scenarios, fs::path work)
      : tool_(std::move(tool)), scenarios_(std::move(scenarios)), work_(std::move(work)) {}

  // Cached by (subcommand, scenario, tag).
  const Run& run(const std::string& sub, const std::string& scenario, const std::string& tag = "",
                 const std::string& extra = "") {
    const std::string key = sub + "/" + scenario + "/" + tag;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Run r;
    r.dir = work_ / (sub + "_" + scenario + (tag.empty() ? "" : "_" + tag));
    fs::remove_all(r.dir);
    fs::create_directories(r.dir);
    const std::string cmd = quote(tool_) + " " + sub + " " + quote((scenarios_ / (scenario + ".scenario")).string()) +
                            " --out " + quote(r.dir.string()) + " --quiet " + extra + " > " +
                            quote((r.dir / "stdout.txt").string()) + " 2> " +
                            quote((r.dir / "stderr.txt").string());
    std::cerr << "[acceptance] " << sub << " " << scenario << (tag.empty() ? "" : " (" + tag + ")") << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    r.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.report = read_json(r.dir / "report.json");
    r.timings = read_json(r.dir / "timings.json");
    if (r.exit_code > 1) {
      std::ifstream err(r.dir / "stderr.txt");
      std::stringstream ss;
      ss << err.rdbuf();
      r.error = ss.str();
      while (!r.error.empty() && r.error.back() == '\n') r.error.pop_back();
    }
    return cache_.emplace(key, std::move(r)).first->second;
  }

 private:
  std::string tool_;
  fs::path scenarios_, work_;
  std::map<std::string, Run> cache_;
};

// Accumulates the checks of one criterion.
class Line {
 public:
  void value(const Run& r, const std::string& id, const std::string& cmp, double threshold) {
    if (r.exit_code > 1) {
      fail("run failed (exit " + std::to_string(r.exit_code) + "): " + r.error);
      return;
    }
    const json* c = r.criterion(id);
    if (!c || !(*c)["value"].is_number()) {
      fail(id + " missing from report");
      return;
    }
    const double v = (*c)["value"].get<double>();
    const bool ok = cmp == "<=" ? v <= threshold : cmp == ">=" ? v >= threshold : v == threshold;
    add(ok, id + " " + fmt(v) + " " + cmp + " " + fmt(threshold));
  }
  void runtime(const std::string& what, double seconds, double limit) {
    if (seconds < 0.0) {
      fail(what + " runtime missing");
      return;
    }
    add(seconds <= limit, what + " " + fmt(seconds) + " s <= " + fmt(limit) + " s");
  }
  void add(bool ok, const std::string& text) {
    pass_ = pass_ && ok;
    parts_.push_back(text);
  }
  void fail(const std::string& text) { add(false, text); }
  bool print(int n, const std::string& title) const {
    std::cout << (pass_ ? "PASS" : "FAIL") << "  " << n << ". " << title << ": ";
    for (std::size_t i = 0; i < parts_.size(); ++i) std::cout << (i ? "; " : "") << parts_[i];
    std::cout << std::endl;
    return pass_;
  }

 private:
  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  }
  bool pass_ = true;
  std::vector<std::string> parts_;
};

// Byte comparison of two artifact directories, ignoring wall-clock timings.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::size_t nb = 0;
  for (const auto& e : fs::directory_iterator(b))
    if (e.is_regular_file()) ++nb;
  if (names.size() != nb) return "file count differs";
  std::size_t compared = 0;
  for (const auto& n : names) {
    if (n == "timings.json" || n == "stdout.txt" || n == "stderr.txt") continue;
    std::ifstream fa(a / n, std::ios::binary), fb(b / n, std::ios::binary);
    if (!fb) return n + " missing in repeat";
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    if (sa != sb) return n + " differs";
    ++compared;
  }
  return compared == 0 ? "no artifacts" : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks for cgoh"};
  std::string tool, scenarios, work;
  std::vector<int> only;
  app.add_option("--tool", tool, "path of the cgoh executable")->required();
  app.add_option("--scenarios", scenarios, "directory holding default.scenario and gauge_pair.scenario")->required();
  app.add_option("--work", work, "scratch directory for artifacts")->required();
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  Harness H(tool, scenarios, work);
  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  std::vector<std::pair<int, std::function<bool(int)>>> criteria{
      {1,
       [&](int n) {
         const Run& r = H.run("dbar-verify", "default");
         Line l;
         l.value(r, "dbar.inversion_error", "<=", 1e-3);
         l.value(r, "dbar.order", ">=", 1.8);
         l.runtime("dbar suite", r.suite_seconds("dbar"), 30.0);
         return l.print(n, "dbar inversion of 20 fields at 256^2");
       }},
      {2,
       [&](int n) {
         const Run& r = H.run("cgo-converge", "default");
         Line l;
         l.value(r, "transport.residual", "<=", 5e-3);
         l.value(r, "transport.monotone", "==", 1.0);
         return l.print(n, "transport phase residual at 96^3 and monotone h-limit");
       }},
      {3,
       [&](int n) {
         const Run& r = H.run("cgo-converge", "default");
         Line l;
         l.value(r, "cgo.amplitude_rate", ">=", 1.2);
         l.value(r, "cgo.remainder_rate", ">=", 0.25);
         l.runtime("cgo suite", r.suite_seconds("cgo"), 600.0);
         return l.print(n, "semiclassical rates over h = 2^-3 .. 2^-7");
       }},
      {4,
       [&](int n) {
         const Run& r = H.run("gauge-check", "default");
         Line l;
         l.value(r, "gauge.vs_truncation", "<=", 10.0);
         l.value(r, "gauge.order", ">=", 1.8);
         return l.print(n, "gauge invariance of the DN map at 48^3");
       }},
      {5,
       [&](int n) {
         const Run& r = H.run("greens-check", "default");
         Line l;
         l.value(r, "greens.order", ">=", 1.8);
         l.value(r, "greens.control", ">=", 100.0);
         return l.print(n, "Green identity order and conjugate-sign control");
       }},
      {6,
       [&](int n) {
         const Run& a = H.run("identity-verify", "default");
         const Run& b = H.run("reconstruct-curl", "gauge_pair");
         Line l;
         l.value(a, "identity.identical_potentials", "<=", 1e-10);
         l.value(b, "curl.gauge_null", "<=", 0.05);
         return l.print(n, "identity terms for equal potentials and gauge-pair null curl");
       }},
      {7,
       [&](int n) {
         const Run& a = H.run("reconstruct-curl", "default");
         const Run& b = H.run("reconstruct-q", "default");
         Line l;
         l.value(a, "curl.error", "<=", 0.15);
         l.value(b, "q.error", "<=", 0.15);
         l.value(a, "curl.limit_vs_direct", "<=", 2e-2);
         l.value(b, "q.limit_vs_direct", "<=", 2e-2);
         l.runtime("reconstruction", a.suite_seconds("curl") + b.suite_seconds("q"), 1800.0);
         return l.print(n, "reconstruction of curl and q differences on 64^3 / 16^3");
       }},
      {8,
       [&](int n) {
         const Run& r = H.run("identity-verify", "default");
         Line l;
         l.value(r, "contour.moments", "<=", 1e-6);
         l.value(r, "contour.winding", "==", 0.0);
         l.value(r, "contour.log", "<=", 1e-6);
         return l.print(n, "contour moments, winding and holomorphic log on 5 slices");
       }},
      {9,
       [&](int n) {
         const Run& r = H.run("reconstruct-curl", "default");
         Line l;
         l.value(r, "curl.null_space", "<=", 1e-12);
         return l.print(n, "curl synthesis invariant to xi-parallel components");
       }},
      {10,
       [&](int n) {
         Line l;
         for (const std::string sub : {"dbar-verify", "reconstruct-curl", "reconstruct-q"}) {
           const Run& a = H.run(sub, "default");
           const Run& b = H.run(sub, "default", "repeat", "--jobs 2");
           if (a.exit_code > 1 || b.exit_code > 1) {
             l.fail(sub + " run failed");
             continue;
           }
           const std::string d = compare_dirs(a.dir, b.dir);
           l.add(d.empty(), sub + (d.empty() ? " byte-identical" : ": " + d));
         }
         return l.print(n, "repeated default runs are byte-identical");
       }},
  };

  int failed = 0;
  for (auto& [n, f] : criteria)
    if (wanted(n) && !f(n)) ++failed;
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
