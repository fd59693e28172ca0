#include "CLI11.hpp"
#include <cstdlib>
#include <iostream>
#include "json.hpp"

#include "cgoh/fft.hpp"
#include "cgoh/report.hpp"
#include "cgoh/runner.hpp"
#include "cgoh/scenario.hpp"

namespace {

int diagnose(int code, const std::string& kind, const std::string& message) {
  nlohmann::json d{{"tool", cgoh::kVersion}, {"status", code}, {"kind", kind}, {"message", message}};
  // InputError messages lead with "scenario key 'K'"; surface K on its own.
  const auto p = message.find("key '");
  if (p != std::string::npos) {
    const auto q = message.find('\'', p + 5);
    if (q != std::string::npos) d["key"] = message.substr(p + 5, q - p - 5);
  }
  std::cerr << d.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CGO half-space verification and reconstruction"};
  app.set_version_flag("--version", std::string(cgoh::kVersion));
  app.require_subcommand(1, 1);

  std::string scenario_path, positional, out_dir;
  std::vector<std::string> sets;
  int jobs = 1;
  std::int64_t seed = -1;
  bool quiet = false;

  const char* names[][2] = {
      {"dbar-verify", "dbar inversion error and order"},
      {"cgo-converge", "transport phases and CGO rates"},
      {"gauge-check", "gauge invariance of the boundary data"},
      {"greens-check", "Green identity with conj(q)"},
      {"identity-verify", "CGO-pair identity limits and contour checks"},
      {"reconstruct-curl", "recover curl(A2 - A1) from CGO-pair limits"},
      {"reconstruct-q", "recover q1 - q2 with a common magnetic potential"},
      {"full", "every suite enabled in the scenario"},
  };
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    auto* opt = sub->add_option("--scenario", scenario_path, "scenario file");
    sub->add_option("SCENARIO", positional, "scenario file")->excludes(opt);
    sub->add_option("--set", sets, "KEY=VALUE override (repeatable)")->take_all();
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "artifact directory (default: scenario output key)");
    sub->add_option("--seed", seed, "override the scenario seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", quiet, "no progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return diagnose(2, "usage", e.what());
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();
  if (scenario_path.empty()) scenario_path = positional;
  if (scenario_path.empty()) return diagnose(2, "usage", "a scenario file is required");

  const char* cache = std::getenv("CGO_HALF_CACHE");
  try {
    if (seed >= 0) sets.push_back("seed=" + std::to_string(seed));
    const cgoh::Scenario s = cgoh::load_scenario(scenario_path, sets);
    if (cache) cgoh::fft::load_wisdom(cache);
    cgoh::RunContext ctx;
    ctx.jobs = jobs;
    ctx.log = quiet ? nullptr : &std::cerr;
    const int code = cgoh::run(subcommand, s, ctx, out_dir.empty() ? s.output : out_dir);
    if (cache) cgoh::fft::save_wisdom(cache);
    std::cout << (code == 0 ? "PASS" : "FAIL") << " " << subcommand << " (" << s.name << ")" << std::endl;
    return code;
  } catch (const cgoh::InputError& e) {
    return diagnose(2, e.kind(), e.what());
  } catch (const cgoh::Error& e) {
    return diagnose(3, e.kind(), e.what());
  } catch (const std::exception& e) {
    return diagnose(3, "internal", e.what());
  }
}
