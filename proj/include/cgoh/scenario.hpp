#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cgoh/forward.hpp"
#include "cgoh/potentials.hpp"
#include "cgoh/reconstruct.hpp"

namespace cgoh {

// One bump of a potential family. For vector fields amplitude holds the three
// components, for scalar fields (re, im, unused).
struct BumpSpec {
  Vec3 center{};
  double sigma = 0.2;
  double radius = 0.7;
  double taper = 0.5;
  Vec3 amplitude{};
};

// Lower-half data of one potential: analytic bumps or a field dump.
struct FieldSpec {
  std::vector<BumpSpec> bumps;
  std::string file;  // absolute path once parsed
  bool empty() const { return bumps.empty() && file.empty(); }
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  std::array<int, 3> grid_n{64, 64, 65};
  double half_width = 2.0;
  double k = 1.0;
  std::vector<double> h_sequence{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  int lattice_n = 16;
  double lattice_dxi = kPi / 2.0;
  double limit_tolerance = 2e-2;
  int richardson_points = 3;
  double richardson_order = 2.0 / 3.0;

  FieldSpec A1, A2, q1, q2;
  FieldSpec gauge;  // A2 = A1 + grad psi when A2 is not given

  FacePatch gamma1{8, 39, 8, 39};
  FacePatch gamma2{12, 35, 12, 35};

  int dbar_n = 256;
  int dbar_fields = 20;
  int transport_n = 96;
  int transport_potentials = 5;
  int cgo_n = 48;
  int gauge_n = 48;
  int gauge_trials = 5;
  int greens_n = 64;
  int greens_trials = 5;
  int contour_slices = 5;

  std::map<std::string, bool> suites;  // enabled suites for `full`
  std::string output = "out";

  std::string canonical;  // sorted key = value text after overrides
  std::string hash;       // FNV-1a of canonical, hex

  Grid3 grid() const;
  LimitOptions limit_options() const;
  XiLattice lattice() const;
  bool suite_enabled(const std::string& suite) const;
};

// Parses "key = value" lines ('#' comments, optional [section] prefixes) and
// applies "key=value" overrides. File references are resolved against
// base_dir. Throws InputError naming the offending key or line.
Scenario parse_scenario(const std::string& text, const std::string& base_dir,
                        const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

// Potentials of the scenario on its grid: lower-half data, gauge-normalised
// and reflected. common_A uses A1 for both sets (electric reconstruction).
ProblemSetup build_setup(const Scenario& s, bool common_A = false);

// Analytic helpers shared with the suites.
VectorField3 sample_vector_bumps(const Grid3& g, const std::vector<BumpSpec>& bumps, bool lower_only);
ScalarField sample_scalar_bumps(const Grid3& g, const std::vector<BumpSpec>& bumps, bool lower_only);

std::string fnv1a_hex(const std::string& text);

}  // namespace cgoh
