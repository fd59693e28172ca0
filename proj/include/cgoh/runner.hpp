#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cgoh/report.hpp"
#include "cgoh/scenario.hpp"

namespace cgoh {

struct RunContext {
  int jobs = 1;
  std::ostream* log = nullptr;  // progress lines; may be null
};

// Suites run by a subcommand, in order. `full` runs every suite the scenario
// enables. Unknown subcommands raise InputError.
std::vector<std::string> suites_for(const std::string& subcommand, const Scenario& s);

SuiteResult run_suite(const std::string& suite, const Scenario& s, const RunContext& ctx);

// Runs the suites, writes artifacts to out_dir and returns the exit status
// (0 all criteria pass, 1 some criterion fails).
int run(const std::string& subcommand, const Scenario& s, const RunContext& ctx, const std::string& out_dir);

}  // namespace cgoh
