#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgoh/cgo.hpp"
#include "cgoh/halfspace.hpp"

namespace cgoh {

// Two sets of extended (reflection-symmetric) potentials on a grid that is
// node-symmetric about x3 = 0.
struct ProblemSetup {
  VectorField3 A1, A2;
  ScalarField q1, q2;
  double k = 1.0;
  const Grid3& grid() const { return A1.grid; }
  void validate() const;
};

// normalize_gauge followed by extend_reflect of lower-half data.
ReflectedPair prepare_potentials(const VectorField3& A_lower, const ScalarField& q_lower);

struct GammaPair {
  Vec3 gamma1{};
  Vec3 gamma2{};
};

// gamma1 ~ (-xi2, xi1, 0), gamma2 ~ xi x gamma1, both normalised.
GammaPair choose_gammas(const Vec3& xi);

// The two integrals of the boundary identity over the lower half together with
// the four phase-product contributions (s, t) = 00, 01, 10, 11 of their sum.
struct IdentityTerms {
  cplx magnetic_term = 0.0;
  cplx zero_order_term = 0.0;
  double h = 0.0;
  std::array<cplx, 4> pair_terms{};
};

// Integration geometry shared by all evaluations for one setup: the lower
// region N holding the potentials and the symmetric work box W = N u mirror(N).
struct Workspace {
  Grid3 W;           // subgrid of the setup grid
  IndexBox W_index;  // W inside the setup grid
  IndexBox N;        // lower region, in W indices
  VectorField3 A1, A2;  // on W
  VectorField3 dA;   // A2 - A1 on W
  ScalarField c0;    // |A1|^2 - |A2|^2 + q1 - q2 on W
  double scale_A = 0.0;  // integral of |A2 - A1| over the box
  double scale_q = 0.0;  // integral of |q1 - q2| over the box
  static Workspace make(const ProblemSetup& s, int margin = 2);
};

// Trapezoid in x1, x2; spline Filon weights along x3 for the oscillatory cross terms.
IdentityTerms evaluate_identity(const Workspace& ws, const CgoParams& p, const ScalarField& P1,
                                const ScalarField& P2);

// Weights of node k for the integral of f(x) e^{i omega x} over [z0, z0 + (n-1) dz]
// with f piecewise linear between nodes.
std::vector<cplx> filon_weights(double z0, double dz, int n, double omega);
// Same for the cardinal cubic spline through the data extended by zero on both
// sides; the aliased copy near omega dz = 2 pi is damped like sinc^4.
std::vector<cplx> spline_filon_weights(double z0, double dz, int n, double omega);

struct PairOptions {
  bool with_remainder = false;
  bool weight_device = false;  // g = exp(-(Phi1^0 + conj Phi2^0)) in the amplitude of u1
  SliceOptions slice;
};

// Builds u1 (potentials 1, zeta1) and u2 (potentials 2, zeta2) as reflected CGO
// solutions and evaluates both identity integrals.
IdentityTerms cgo_pair_integral(const ProblemSetup& s, const CgoParams& p, const PairOptions& opts = {});

struct AmplitudeStrip {
  ScalarField g;             // exp(-(Phi1^0 + conj Phi2^0))
  double residual = 0.0;     // relative transport residual for the difference field
};

// g together with the check w . grad g = i g w . (A1 - A2), w = gamma1 + i gamma2.
AmplitudeStrip strip_amplitude(const ScalarField& phi1_0, const ScalarField& phi2_0, const CVec3& w,
                               const VectorField3& A1, const VectorField3& A2, double tol);

enum class IdentityKind {
  Magnetic,  // h S(h) / 2i -> w . int (A2 - A1) e^{ix.xi} dx
  Electric,  // S(h) -> int (q1 - q2) e^{ix.xi} dx, requires A1 = A2
};

struct LimitRow {
  double h = 0.0;
  cplx value = 0.0;  // scaled identity value at h
  std::array<cplx, 4> pair_terms{};
};

struct LimitResult {
  cplx direct = 0.0;        // quadrature of the limit integrand
  cplx extrapolated = 0.0;  // Richardson on the last two h values
  cplx previous = 0.0;      // Richardson on the two before
  double discrepancy = 0.0; // |extrapolated - direct| / scale
  std::vector<LimitRow> table;
};

struct LimitOptions {
  std::vector<double> h_sequence{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  int richardson_points = 3;   // last three h values
  double order = 2.0 / 3.0;    // leading error h^{2/3} from the mollifier width
  double tolerance = 2e-2;
  PairOptions pair{false, true, {}};
};

// Richardson step for h2 = h1 / ratio.
cplx richardson(cplx t1, cplx t2, double ratio, double order);

// Throws ConvergenceError (with the table in the message) when the
// discrepancy exceeds the tolerance.
LimitResult limit_identity(const ProblemSetup& s, const Vec3& xi, int gamma2_sign, IdentityKind kind,
                           const LimitOptions& opts = {});

// The h values used by the limit for this xi (the last richardson_points of
// the sequence); ParameterError when h |xi| / 2 >= 1 for one of them.
std::vector<double> limit_h_values(const LimitOptions& opts, const Vec3& xi);

// Transport phases on the work box: the unmollified pair and one mollified
// pair per h value of limit_h_values.
struct LimitPhases {
  ScalarField phi1_0, phi2_0;
  std::vector<ScalarField> phi1, phi2;
};

// Limit evaluation from precomputed phases (no remainder); does not apply
// the tolerance.
LimitResult limit_from_phases(const Workspace& ws, const Vec3& xi, const GammaPair& gammas, IdentityKind kind,
                              const LimitOptions& opts, const LimitPhases& phases);

// ---- lattice assembly and synthesis ----------------------------------------------

struct XiLattice {
  int n = 16;
  double dxi = kPi / 2.0;  // period 2 pi / dxi in space
  std::size_t count() const { return static_cast<std::size_t>(n) * n * n; }
  int lo() const { return -n / 2; }
  std::array<int, 3> m(std::size_t idx) const;
  std::size_t index(const std::array<int, 3>& m) const;
  bool contains(const std::array<int, 3>& m) const;
  Vec3 xi(std::size_t idx) const;
  bool on_line(std::size_t idx) const;  // xi1 = xi2 = 0
};

struct SamplePoint {
  std::array<cplx, 2> extrapolated{};  // per gamma2 sign (+, -)
  std::array<cplx, 2> direct{};
  std::array<double, 2> discrepancy{};
  std::string failure;
};

struct FourierSamples {
  XiLattice lattice;
  bool scalar = false;
  std::vector<CVec3> v;       // vector samples (gamma1/gamma2 components only)
  std::vector<cplx> s;        // scalar samples
  std::vector<char> measured; // usable sample
  std::vector<char> flagged;  // pipeline failure or discrepancy above tolerance
  std::vector<SamplePoint> points;
  double scale = 0.0;
  std::size_t flagged_count() const;
  std::size_t measurable_count() const;  // off the line L
};

struct PipelineOptions {
  LimitOptions limit;
  int jobs = 1;
  bool use_extrapolated = true;  // samples from the CGO limit rather than the direct quadrature
  // Progress callback (directions done, total); may be empty.
  std::function<void(std::size_t, std::size_t)> progress;
};

// Magnetic samples: both gamma2 signs per xi, 2x2 solve for the gamma1 and
// gamma2 components.
FourierSamples fourier_samples_A(const ProblemSetup& s, const XiLattice& lattice, const PipelineOptions& opts);
// Electric samples; requires A1 = A2.
FourierSamples fourier_samples_q(const ProblemSetup& s, const XiLattice& lattice, const PipelineOptions& opts);

// Fraction of flagged points above which synthesis refuses to run.
inline constexpr double kMaxFlaggedFraction = 0.05;

// Inverse lattice transform of -i xi x v; missing samples (line L, flagged)
// are filled from lateral neighbours and made Hermitian.
VectorField3 recover_curl(const FourierSamples& samples, const Grid3& target);
ScalarField recover_q(const FourierSamples& samples, const Grid3& target);

// Curl spectrum -i xi x v on the lattice after filling (exposed for tests).
std::vector<CVec3> curl_spectrum(const FourierSamples& samples);

// Ground truth helpers.
VectorField3 difference_curl(const ProblemSetup& s);
double relative_l2(const ScalarField& a, const ScalarField& ref, const IndexBox& region);
double relative_l2(const VectorField3& a, const VectorField3& ref, const IndexBox& region);

}  // namespace cgoh
