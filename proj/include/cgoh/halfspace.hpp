#pragma once

#include "cgoh/cgo.hpp"
#include "cgoh/fields.hpp"

namespace cgoh {

// Potentials on a grid that is node-symmetric about x3 = 0. The lower half
// (x3 <= 0) carries the physical data.
struct ReflectedPair {
  VectorField3 A;  // A1, A2 even and A3 odd under x3 -> -x3
  ScalarField q;   // even
};

struct GaugeNormalized {
  VectorField3 A;  // A + grad psi on the lower half, zero above the plane
  ScalarField psi;
};

// psi(x) = -chi(x3) int_0^{x3} A3(x1, x2, s) ds with a smooth cutoff chi equal
// to 1 near the plane, so that psi vanishes on the plane and (A + grad psi)_3
// vanishes there.
GaugeNormalized normalize_gauge(const VectorField3& A);

// Even/odd extension of lower-half data across x3 = 0.
ReflectedPair extend_reflect(const VectorField3& A, const ScalarField& q);

// u(x) = u~(x) - u~(x~); vanishes identically on the plane.
ScalarField reflect_solution(const ScalarField& u_tilde);

// Linear exponents x . kappa of the four products e^{x^s . zeta1/h} conj(e^{x^t . zeta2/h})
// with x^0 = x and x^1 = x~ (s, t in {0, 1}).
struct PhaseProducts {
  CVec3 k00{}, k01{}, k10{}, k11{};
  Vec3 xi{}, xi_plus{}, xi_minus{};
  const CVec3& kappa(int s, int t) const { return s == 0 ? (t == 0 ? k00 : k01) : (t == 0 ? k10 : k11); }
};

// Requires gamma1_3 = 0 and gamma2_3 != 0; all four exponents are then purely
// imaginary, with frequencies xi, xi+, xi-, and the mirror of xi.
PhaseProducts phase_products(const CgoParams& p);

}  // namespace cgoh
