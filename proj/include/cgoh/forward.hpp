#pragma once

#include <memory>
#include <vector>

#include "cgoh/dbar.hpp"
#include "cgoh/fields.hpp"
#include "cgoh/linsolve.hpp"

namespace cgoh {

// Dirichlet: every face carries Dirichlet data.
// Impedance: the top face (largest x3, the proxy for the plane x3 = 0) carries
// Dirichlet data; the other faces satisfy d_n u - i k u = 0.
enum class BoundaryKind { Dirichlet, Impedance };

// Seven-point discretisation of L_{A,q} - k^2 with boundary rows. Immutable
// after build; solves against the shared factorisation are thread-safe.
class DiscreteOperator {
 public:
  DiscreteOperator(const VectorField3& A, const ScalarField& q, double k, BoundaryKind bc);

  const Grid3& grid() const { return A_.grid; }
  const VectorField3& A() const { return A_; }
  const ScalarField& q() const { return q_; }
  double k() const { return k_; }
  BoundaryKind boundary() const { return bc_; }
  const SparseMatrixC& matrix() const { return matrix_; }
  bool is_dirichlet_node(int i, int j, int kk) const;
  bool is_boundary_node(int i, int j, int kk) const;
  // Estimate of the 1-norm condition number, computed on first request.
  double condition() const;

  // Solves with the Dirichlet values taken from `boundary` at Dirichlet nodes
  // and an optional interior forcing.
  ScalarField solve(const ScalarField& boundary, const ScalarField* forcing = nullptr) const;

 private:
  VectorField3 A_;
  ScalarField q_;
  double k_;
  BoundaryKind bc_;
  SparseMatrixC matrix_;
  std::shared_ptr<SparseLU> lu_;
  mutable double condition_ = -1.0;
};

// Condition numbers above this are reported as a resonance.
inline constexpr double kResonanceCondition = 1e12;

// Builds and factorises; a near-singular system raises ResonanceError with the
// condition estimate.
std::shared_ptr<DiscreteOperator> build_operator(const VectorField3& A, const ScalarField& q, double k,
                                                 BoundaryKind bc);

ScalarField solve_dirichlet(const DiscreteOperator& op, const ScalarField& boundary,
                            const ScalarField* forcing = nullptr);

// Plane grid of the top face and conversions between plane data and grid data.
Grid2 top_face(const Grid3& g);
ScalarField embed_top_face(const Grid3& g, const PlaneField& f);
PlaneField top_face_values(const ScalarField& u);

// Index rectangle on the top face (inclusive).
struct FacePatch {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;
  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
};

struct DnMapSample {
  PlaneField f;      // Dirichlet datum (zero outside gamma2)
  PlaneField trace;  // (d_n + i A.n) u on gamma1, zero elsewhere
  FacePatch gamma1, gamma2;
};

// Conormal trace on the top face with outward normal +e3, one-sided
// second-order differences.
PlaneField conormal_trace(const ScalarField& u, const VectorField3& A);
DnMapSample dn_map(const DiscreteOperator& op, const PlaneField& f, const FacePatch& gamma2,
                   const FacePatch& gamma1);

struct GaugeCheck {
  PlaneField lhs;  // Lambda_{A + grad psi, q}(f)
  PlaneField rhs;  // e^{-i psi} Lambda_{A,q}(e^{i psi} f)
  double discrepancy = 0.0;  // relative L2 on the top face
};

// psi must be real and have vanishing normal derivative on the impedance faces.
GaugeCheck gauge_check(const VectorField3& A, const ScalarField& q, double k, const ScalarField& psi,
                       const PlaneField& f, BoundaryKind bc = BoundaryKind::Impedance);

// |(L_{A,q} u, v) - (u, L_{A,conj q} v) - boundary terms| with trapezoidal
// volume and face quadrature. With conjugate_q = false the right slot uses q
// itself (negative control).
double greens_residual(const ScalarField& u, const ScalarField& v, const VectorField3& A, const ScalarField& q,
                       bool conjugate_q = true);

struct RadiationRow {
  double radius = 0.0;
  double integral = 0.0;  // of |d_r u - i k u|^2 over the sphere
};

// Spheres about `centre`; each must lie inside the grid box.
std::vector<RadiationRow> radiation_residual(const ScalarField& u, const Vec3& centre, double k,
                                             const std::vector<double>& radii);

}  // namespace cgoh
