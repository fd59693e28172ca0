#include <string>

#include "cgoh/scenario.hpp"
#include "doctest.h"

using namespace cgoh;

namespace {

const std::string kBase = R"(name = base
seed = 7
k = 1.5
h_sequence = 0.125 0.0625 0.03125
[grid]
n = 24 24 25
half_width = 2
[lattice]
n = 8
[potentials]
A1.0.center = 0 0 -0.9
A1.0.amplitude = 1 0 0.5
q1.0.center = 0.1 0 -0.8
q1.0.amplitude = 2 -0.5
[suites]
dbar = false
)";

std::string input_error_message(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_scenario(text, ".", ov);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("scenario values and defaults") {
  const Scenario s = parse_scenario(kBase, ".");
  CHECK(s.name == "base");
  CHECK(s.seed == 7);
  CHECK(s.k == 1.5);
  CHECK(s.h_sequence.size() == 3);
  CHECK(s.grid_n == std::array<int, 3>{24, 24, 25});
  CHECK(s.lattice().n == 8);
  REQUIRE(s.A1.bumps.size() == 1);
  CHECK(s.A1.bumps[0].amplitude[2] == 0.5);
  CHECK(s.q1.bumps[0].amplitude[1] == -0.5);
  CHECK(s.A1.bumps[0].sigma == 0.2);
  CHECK_FALSE(s.suite_enabled("dbar"));
  CHECK(s.suite_enabled("curl"));
  CHECK(s.greens_n == 64);
  CHECK(s.grid().symmetric_about_plane());
}

TEST_CASE("scenario hash follows content, not layout") {
  const Scenario a = parse_scenario(kBase, ".");
  const Scenario b = parse_scenario("# comment\n\n" + kBase + "\n", ".");
  CHECK(a.hash == b.hash);
  CHECK(a.hash.size() == 16);
  const Scenario c = parse_scenario(kBase, ".", {"k=2"});
  CHECK(c.k == 2.0);
  CHECK(c.hash != a.hash);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("malformed scenarios name the offending key") {
  CHECK(input_error_message(kBase + "A1.0.sigma = 0.3\n").find("'suites.A1.0.sigma'") != std::string::npos);
  CHECK(input_error_message("k = 1\nk = 2\n").find("'k'") != std::string::npos);
  CHECK(input_error_message("frobnicate = 1\n").find("'frobnicate'") != std::string::npos);
  CHECK(input_error_message("[grid]\nn = 24 24 24\n").find("'grid.n'") != std::string::npos);
  CHECK(input_error_message("[potentials]\nA1.0.center = 0 0 -0.3\n").find("'potentials.A1.0.center'") !=
        std::string::npos);
  CHECK(input_error_message("h_sequence = 0.1 0.2\n").find("'h_sequence'") != std::string::npos);
  CHECK(input_error_message("[potentials]\nA1.0.center = 0 0 -0.9\ngauge.0.center = 0 0 -0.9\n"
                            "A2.0.center = 0 0 -0.9\n")
            .find("'potentials.gauge'") != std::string::npos);
  CHECK(input_error_message("k = abc\n").find("'k'") != std::string::npos);
  CHECK(input_error_message(kBase, {"lattice.n=7"}).find("'lattice.n'") != std::string::npos);
  CHECK(input_error_message("[potentials]\nA1.0.amplitude = 1 2\n").find("'potentials.A1.0.amplitude'") !=
        std::string::npos);
  CHECK_FALSE(input_error_message("novalue\n").empty());
  CHECK_FALSE(input_error_message(kBase, {"noequals"}).empty());
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.scenario"), InputError);
}

TEST_CASE("built potentials are lower-half reflections") {
  const Scenario s = parse_scenario(kBase, ".");
  const ProblemSetup p = build_setup(s, false);
  CHECK_NOTHROW(p.validate());
  CHECK(sup_norm(p.A1) > 0.0);
  CHECK(sup_norm(p.A2) == 0.0);
  CHECK(sup_norm(p.q2 - p.q1) == 0.0);
  const ProblemSetup c = build_setup(s, true);
  CHECK(sup_norm(c.A2 - c.A1) == 0.0);
}

TEST_CASE("a gauge function produces a gradient difference") {
  const Scenario s = parse_scenario(kBase + R"([potentials]
gauge.0.center = 0 0 -0.9
gauge.0.sigma = 0.25
gauge.0.amplitude = 0.7
)", ".");
  const ProblemSetup p = build_setup(s, false);
  const VectorField3 c = curl(p.A2 - p.A1);
  const VectorField3 d = p.A2 - p.A1;
  CHECK(sup_norm(d) > 0.1);
  // Away from the plane row the discrete curl of the difference is a curl of a
  // sampled gradient: second order small.
  double worst = 0.0;
  const Grid3& g = p.grid();
  for (int k = 2; k < g.plane_row() - 1; ++k)
    for (int j = 2; j < g.n(1) - 2; ++j)
      for (int i = 2; i < g.n(0) - 2; ++i)
        for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(c.c[a][g.index(i, j, k)]));
  CHECK(worst < 0.2 * sup_norm(d) / g.h(0));
}
