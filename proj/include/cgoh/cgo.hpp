#pragma once

#include <optional>
#include <vector>

#include "cgoh/fields.hpp"

namespace cgoh {

// Right-handed orthonormal frame; transport phases are computed slice by
// slice in planes spanned by alpha and beta.
struct Frame {
  Vec3 alpha{1, 0, 0};
  Vec3 beta{0, 1, 0};
  Vec3 gamma{0, 0, 1};

  static Frame from(const Vec3& alpha, const Vec3& beta);
  CVec3 zeta0() const { return complexify(alpha, beta); }
  Vec3 to_frame(const Vec3& x) const { return {dot(x, alpha), dot(x, beta), dot(x, gamma)}; }
  Vec3 from_frame(const Vec3& y) const {
    return {y[0] * alpha[0] + y[1] * beta[0] + y[2] * gamma[0], y[0] * alpha[1] + y[1] * beta[1] + y[2] * gamma[1],
            y[0] * alpha[2] + y[1] * beta[2] + y[2] * gamma[2]};
  }
  void validate() const;
};

struct ZetaPair {
  CVec3 zeta1{};
  CVec3 zeta2{};
};

// zeta1 = i h xi/2 + g1 + i sqrt(1 - h^2|xi|^2/4) g2,
// zeta2 = -i h xi/2 - g1 + i sqrt(1 - h^2|xi|^2/4) g2.
ZetaPair make_zeta_pair(double h, const Vec3& xi, const Vec3& gamma1, const Vec3& gamma2);

// One complex phase together with its h -> 0 limit zeta0 and the frame in
// which the transport equation zeta0 . grad Phi = -i zeta0 . A is sliced.
struct CgoSpec {
  double h = 0.1;
  CVec3 zeta{};
  CVec3 zeta0{};
  Frame frame;
};

struct CgoParams {
  double h = 0.1;
  Vec3 xi{};
  Vec3 gamma1{};
  Vec3 gamma2{};
  ZetaPair zeta;
  double epsilon = 0.0;  // mollifier width h^(1/3)

  static CgoParams make(double h, const Vec3& xi, const Vec3& gamma1, const Vec3& gamma2);
  // Phase of u1 (zeta0 = gamma1 + i gamma2) and of u2 (zeta0 = -gamma1 + i gamma2).
  CgoSpec first() const;
  CgoSpec second() const;
};

// ---- mollification ----------------------------------------------------------

// Normalised C-infinity bump supported in the ball of radius eps.
double mollifier(const Vec3& x, double eps);

struct Mollified {
  VectorField3 sharp;  // A * psi_eps
  VectorField3 flat;   // A - sharp
};

// Requires the support of A to stay at least eps away from the grid faces and
// eps to cover at least two grid cells.
Mollified mollify(const VectorField3& A, double eps);

// Convolution with psi_eps of a field that need not be compactly supported.
// Values within eps of the grid faces are not meaningful.
ScalarField mollify_interior(const ScalarField& f, double eps);

// ---- transport phase ---------------------------------------------------------

struct SliceOptions {
  Interp interp = Interp::Tricubic;
  double spacing_factor = 1.0;  // frame-grid spacing relative to the finest storage spacing
};

// Phi = (1/2) N^{-1}(-i zeta0 . (A o T^{-1})) o T, returned on the grid of A.
ScalarField solve_transport_phase(const VectorField3& A, const CVec3& zeta0, const Frame& frame,
                                  const SliceOptions& opts = {});
// Same solve applied to the unmollified potential.
ScalarField phase_limit(const VectorField3& A, const CVec3& zeta0, const Frame& frame, const SliceOptions& opts = {});
// Same solve, returned on a different target grid (the data grid of A is
// still used for the source).
ScalarField solve_transport_phase_on(const VectorField3& A, const CVec3& zeta0, const Frame& frame,
                                     const Grid3& target, const SliceOptions& opts = {});

// Relative L2 residual of zeta0 . grad Phi + i zeta0 . A over interior nodes
// (two layers in), with fourth-order differences.
double transport_residual(const ScalarField& phi, const VectorField3& A, const CVec3& zeta0);

// Spectrum of a field, reusable for several mollifier widths.
class InteriorMollifier {
 public:
  explicit InteriorMollifier(const ScalarField& f);
  ScalarField at(double eps) const;  // same caveat as mollify_interior

 private:
  Grid3 grid_;
  std::vector<cplx> spectrum_;
};

// ---- amplitude and conjugated operator -----------------------------------------

// a = g exp(Phi). When check_tol is set, g must satisfy zeta0 . grad g = 0 to
// that relative tolerance.
ScalarField build_amplitude(const ScalarField& g, const ScalarField& phi, const CVec3& zeta0,
                            std::optional<double> check_tol = std::nullopt);
ScalarField build_amplitude(const ScalarField& phi);

// Pointwise data entering the expansion of
// e^{-x.zeta/h} h^2 (L_{A,q} - k^2) e^{x.zeta/h} a.
struct ConjugatedPoint {
  cplx a;
  CVec3 grad_a;
  cplx lap_a;
  Vec3 A;
  Vec3 A_sharp;
  double div_A;
  cplx q;
};

struct ConjugatedTerms {
  std::array<cplx, 9> term{};  // in the order of the expansion
  cplx total() const {
    cplx s = 0.0;
    for (const auto& t : term) s += t;
    return s;
  }
};

ConjugatedTerms conjugated_expansion(const ConjugatedPoint& p, const CgoSpec& spec, double k);

struct ConjugatedResidual {
  ScalarField field;
  double sup = 0.0;  // over the interior nodes of the region
};

ConjugatedResidual conjugated_residual(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                       const VectorField3& A_sharp, const ScalarField& q, double k);
ConjugatedResidual conjugated_residual(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                       const VectorField3& A_sharp, const ScalarField& q, double k,
                                       const IndexBox& region);

// ---- remainder ---------------------------------------------------------------------

enum class RemainderStencil {
  Expanded,    // central differences of -h^2 Lap - 2 h zeta.grad + lower order terms
  Conjugated,  // exact conjugate e^{-x.zeta/h} h^2 (L_h - k^2) e^{x.zeta/h} of the forward stencil
};

enum class RemainderBoundary {
  MinimalNorm,  // least-norm solution of the interior equations, no boundary data
  Dirichlet,    // r = 0 on the boundary of the grid
};

struct RemainderOptions {
  RemainderStencil stencil = RemainderStencil::Expanded;
  RemainderBoundary boundary = RemainderBoundary::MinimalNorm;
};

struct RemainderResult {
  ScalarField r;
  double relative_residual = 0.0;  // of the linear solve
};

// Solves L_zeta r = -L_zeta a at the interior nodes of the grid of a.
RemainderResult solve_remainder(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                const VectorField3& A_sharp, const ScalarField& q, double k,
                                const RemainderOptions& opts = {});

// Discrete (L_h - k^2) u on interior nodes of the forward seven-point stencil;
// zero on boundary nodes.
ScalarField apply_forward_stencil(const ScalarField& u, const VectorField3& A, const ScalarField& q, double k);

// e^{x.zeta/h} (a + r) on the grid of a.
ScalarField assemble_cgo(const ScalarField& a, const ScalarField& r, const CgoSpec& spec);

}  // namespace cgoh
