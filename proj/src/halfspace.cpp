#include "cgoh/halfspace.hpp"

#include <sstream>

#include "cgoh/potentials.hpp"

namespace cgoh {

GaugeNormalized normalize_gauge(const VectorField3& A) {
  const Grid3& g = A.grid;
  const int p = g.plane_row();
  const double dz = g.h(2);
  // Depth of the support below the plane decides the cutoff band.
  double depth_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= p; ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i)
        if (norm(A.at(g.index(i, j, k))) > 0.0) depth_gap = std::min(depth_gap, -g.coord(2, k));
  const double box_depth = -g.box().lo[2];
  const double d = depth_gap > 0.5 * dz ? std::min(depth_gap, box_depth) : 0.25 * box_depth;
  const double a = 0.5 * d, b = d;

  GaugeNormalized out{VectorField3(g, A.real_valued), ScalarField(g)};
  ScalarField I(g);  // int_0^{x3} A3 ds on the lower half
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i) {
      I(i, j, p) = 0.0;
      for (int k = p - 1; k >= 0; --k)
        I(i, j, k) = I(i, j, k + 1) - 0.5 * dz * (A.c[2][g.index(i, j, k)] + A.c[2][g.index(i, j, k + 1)]);
    }
  for (int k = 0; k <= p; ++k) {
    const double chi = smooth_step(-g.coord(2, k), a, b);
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) out.psi.v[g.index(i, j, k)] = -chi * I(i, j, k);
  }
  // The same difference stencil as curl, so the discrete curl is unchanged away
  // from the plane row.
  const ScalarField d1 = partial(out.psi, 0), d2 = partial(out.psi, 1), d3 = partial(out.psi, 2);
  for (int k = 0; k <= p; ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, k);
        out.A.c[0][n] = A.c[0][n] + d1.v[n];
        out.A.c[1][n] = A.c[1][n] + d2.v[n];
        out.A.c[2][n] = k == p ? 0.0 : A.c[2][n] + d3.v[n];
      }
  if (A.real_valued)
    for (auto& c : out.A.c)
      for (auto& z : c) z = cplx(z.real(), 0.0);
  return out;
}

ReflectedPair extend_reflect(const VectorField3& A, const ScalarField& q) {
  const Grid3& g = A.grid;
  require_same_grid(g, q.grid, "extend_reflect");
  const int p = g.plane_row();
  double amax = 0.0, trace = 0.0;
  for (int k = 0; k <= p; ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, k);
        amax = std::max(amax, norm(A.at(n)));
        if (k == p) trace = std::max(trace, std::abs(A.c[2][n]));
      }
  if (trace > 1e-10 * std::max(amax, 1e-300)) {
    std::ostringstream os;
    os << "extend_reflect: normal component on the plane is " << trace << " (normalize the gauge first)";
    throw PreconditionError(os.str());
  }
  ReflectedPair out{VectorField3(g, A.real_valued), ScalarField(g)};
  for (int k = 0; k < g.n(2); ++k) {
    const int src = k <= p ? k : g.mirror_row(k);
    const double sign3 = k <= p ? 1.0 : -1.0;
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, k), m = g.index(i, j, src);
        out.A.c[0][n] = A.c[0][m];
        out.A.c[1][n] = A.c[1][m];
        out.A.c[2][n] = k == p ? 0.0 : sign3 * A.c[2][m];
        out.q.v[n] = q.v[m];
      }
  }
  return out;
}

ScalarField reflect_solution(const ScalarField& ut) {
  const Grid3& g = ut.grid;
  g.plane_row();
  ScalarField u(g);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, k), m = g.index(i, j, g.mirror_row(k));
        u.v[n] = n == m ? cplx(0.0) : ut.v[n] - ut.v[m];
      }
  return u;
}

PhaseProducts phase_products(const CgoParams& prm) {
  if (std::abs(prm.gamma2[2]) <= 1e-12) throw ParameterError("phase_products: gamma2 must have non-zero third component");
  const CVec3 z1 = prm.zeta.zeta1, z2b = conj(prm.zeta.zeta2);
  const CVec3 rz1 = reflect(z1), rz2b = reflect(z2b);
  PhaseProducts out;
  for (int d = 0; d < 3; ++d) {
    out.k00[d] = (z1[d] + z2b[d]) / prm.h;
    out.k01[d] = (z1[d] + rz2b[d]) / prm.h;
    out.k10[d] = (rz1[d] + z2b[d]) / prm.h;
    out.k11[d] = (rz1[d] + rz2b[d]) / prm.h;
  }
  double re = 0.0, mag = 0.0;
  for (const CVec3* k : {&out.k00, &out.k01, &out.k10, &out.k11})
    for (int d = 0; d < 3; ++d) {
      re = std::max(re, std::abs((*k)[d].real()));
      mag = std::max(mag, std::abs((*k)[d]));
    }
  if (re > 1e-12 * std::max(mag, 1.0)) {
    std::ostringstream os;
    os << "phase_products: exponent with real part " << re << " (gamma1 must have zero third component)";
    throw RestrictionError(os.str());
  }
  const double s = std::sqrt(1.0 - prm.h * prm.h * dot(prm.xi, prm.xi) / 4.0);
  out.xi = prm.xi;
  out.xi_plus = {prm.xi[0], prm.xi[1], 2.0 / prm.h * s * prm.gamma2[2]};
  out.xi_minus = {prm.xi[0], prm.xi[1], -2.0 / prm.h * s * prm.gamma2[2]};
  return out;
}

}  // namespace cgoh
