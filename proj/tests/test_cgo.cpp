#include <cmath>

#include "cgoh/cgo.hpp"
#include "cgoh/dbar.hpp"
#include "cgoh/potentials.hpp"
#include "doctest.h"

using namespace cgoh;

namespace {

Grid3 cube(double L, int n) { return Grid3(Box3{{-L, -L, -L}, {L, L, L}}, n); }

cplx cdot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

VectorField3 bump_field(const Grid3& g, const Bump& b, const Vec3& amp) {
  return sample_vector(g, [&](const Vec3& x) { return scale(amp, b.value(x)); });
}

}  // namespace

TEST_CASE("zeta pair for a hand-computed case") {
  const ZetaPair z = make_zeta_pair(0.2, {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  CHECK(std::abs(z.zeta1[0] - cplx(0, 0.1)) < 1e-15);
  CHECK(std::abs(z.zeta1[1] - 1.0) < 1e-15);
  CHECK(std::abs(z.zeta1[2] - cplx(0, std::sqrt(0.99))) < 1e-15);
  CHECK(std::abs(z.zeta1[2].imag() - 0.994987) < 1e-6);
  CHECK(std::abs(cdot(z.zeta1, z.zeta1)) < 1e-15);
  CHECK(std::abs(cdot(z.zeta2, z.zeta2)) < 1e-15);
}

TEST_CASE("zeta pair structure and small-h limit") {
  const Vec3 xi{1.3, -0.4, 2.1};
  const Vec3 g1 = scale(Vec3{0.4, 1.3, 0.0}, 1.0 / std::sqrt(0.16 + 1.69));
  Vec3 g2{xi[1] * g1[2] - xi[2] * g1[1], xi[2] * g1[0] - xi[0] * g1[2], xi[0] * g1[1] - xi[1] * g1[0]};
  g2 = scale(g2, 1.0 / norm(g2));
  const double h = 0.1;
  const ZetaPair z = make_zeta_pair(h, xi, g1, g2);
  for (int d = 0; d < 3; ++d) CHECK(std::abs(z.zeta1[d] + std::conj(z.zeta2[d]) - cplx(0, h * xi[d])) < 1e-14);
  CHECK(std::abs(cdot(z.zeta1, z.zeta1)) < 1e-14);
  CHECK(std::abs(cdot(z.zeta2, z.zeta2)) < 1e-14);
  const ZetaPair s = make_zeta_pair(1e-4, xi, g1, g2);
  for (int d = 0; d < 3; ++d) {
    const cplx w(g1[d], g2[d]);
    CHECK(std::abs(s.zeta1[d] - w) < 1e-4 * norm(xi));
    CHECK(std::abs(std::conj(s.zeta2[d]) + w) < 1e-4 * norm(xi));
  }
}

TEST_CASE("mollifier has unit mass") {
  const double eps = 0.3;
  const Grid3 g = cube(0.35, 71);
  const ScalarField m = sample(g, [&](const Vec3& x) { return mollifier(x, eps); });
  CHECK(std::abs(integrate(m) - 1.0) < 1e-6);
  CHECK(mollifier({0.31, 0, 0}, eps) == 0.0);
}

TEST_CASE("mollification of zero and of locally constant fields") {
  const Grid3 g = cube(2.0, 41);
  const Mollified z = mollify(VectorField3(g), 0.4);
  CHECK(sup_norm(z.sharp) == 0.0);
  CHECK(sup_norm(z.flat) == 0.0);
  // Constant (1, -2, 0.5) on |x| <= 0.9, tapering to zero by 1.2.
  const VectorField3 A = sample_vector(g, [](const Vec3& x) {
    return scale(Vec3{1.0, -2.0, 0.5}, smooth_step(norm(x), 0.9, 1.2));
  });
  const double eps = 0.4;
  const Mollified m = mollify(A, eps);
  for (std::size_t n = 0; n < g.size(); ++n) {
    for (int d = 0; d < 3; ++d) CHECK(std::abs(m.sharp.c[d][n] + m.flat.c[d][n] - A.c[d][n]) < 1e-12);
    const Vec3 x = g.node(static_cast<int>(n % 41), static_cast<int>((n / 41) % 41), static_cast<int>(n / (41 * 41)));
    if (norm(x) <= 0.9 - eps) {
      CHECK(std::abs(m.sharp.c[0][n] - 1.0) < 1e-3);
      CHECK(std::abs(m.sharp.c[1][n] + 2.0) < 2e-3);
    }
  }
}

TEST_CASE("transport phase of zero and of a gradient") {
  const Grid3 g = cube(1.5, 48);
  const Frame f = Frame::from({1, 0, 0}, {0, 1, 0});
  CHECK(sup_norm(solve_transport_phase(VectorField3(g), f.zeta0(), f)) == 0.0);

  // A = grad psi: the decaying solution is Phi = -i psi.
  const Bump b{{0.1, -0.1, 0.05}, 0.3, 0.9, 0.5};
  const ScalarField psi = sample(g, [&](const Vec3& x) { return b.value(x); });
  const VectorField3 A = sample_vector(g, [&](const Vec3& x) { return b.gradient(x); });
  const ScalarField phi = solve_transport_phase(A, f.zeta0(), f);
  const ScalarField sum = phi + kI * psi;
  CHECK(sup_norm(sum) < 1e-2 * sup_norm(psi));

  // Slice-holomorphic: dbar of (Phi + i psi) on the plane through the middle.
  const int k = 24;
  const Grid2 s({g.coord(0, 0), g.coord(1, 0)}, {g.coord(0, 47), g.coord(1, 47)}, {48, 48});
  PlaneField slice(s);
  for (int j = 0; j < 48; ++j)
    for (int i = 0; i < 48; ++i) slice(i, j) = sum(i, j, k);
  PlaneField ref(s);
  for (int j = 0; j < 48; ++j)
    for (int i = 0; i < 48; ++i) ref(i, j) = psi(i, j, k);
  CHECK(l2_norm(dbar_apply(slice)) < 5e-2 * l2_norm(dbar_apply(ref)));

  // Rotated frame: same identity.
  const Frame r = Frame::from(scale(Vec3{1, 1, 1}, 1 / std::sqrt(3.0)), scale(Vec3{1, -1, 0}, 1 / std::sqrt(2.0)));
  const ScalarField phr = solve_transport_phase(A, r.zeta0(), r);
  CHECK(sup_norm(phr + kI * psi) < 2e-2 * sup_norm(psi));
}

TEST_CASE("mollified phases approach the limit phase") {
  const Grid3 g = cube(2.5, 48);
  const VectorField3 A = bump_field(g, Bump{{0.05, 0.0, -0.05}, 0.6, 1.6, 0.5}, {0.8, -0.6, 0.4});
  const Frame f = Frame::from(scale(Vec3{1, 2, 0}, 1 / std::sqrt(5.0)), {0, 0, 1});
  const ScalarField phi0 = phase_limit(A, f.zeta0(), f);
  CHECK(sup_norm(phase_limit(VectorField3(g), f.zeta0(), f)) == 0.0);
  std::vector<double> d;
  for (int e = 3; e <= 6; ++e) {
    const double h = std::ldexp(1.0, -e);
    d.push_back(sup_norm(solve_transport_phase(mollify(A, std::cbrt(h)).sharp, f.zeta0(), f) - phi0));
  }
  MESSAGE("sup |Phi_h - Phi0|: " << d[0] << " " << d[1] << " " << d[2] << " " << d[3]);
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
  CHECK(d.back() <= d.front() / 3);
}

TEST_CASE("amplitude from a phase") {
  const Grid3 g = cube(1.0, 32);
  const ScalarField phi = sample(g, [](const Vec3& x) { return cplx(x[0], 0.5 * x[1] * x[2]); });
  const ScalarField a = build_amplitude(ScalarField(g, 1.0), phi, {1.0, kI, 0.0});
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(a.v[n] - std::exp(phi.v[n])) < 1e-14);
  // (1, i, 0) . grad exp(-(x1 + i x2)) = -(1 + i^2) exp(...) = 0.
  const ScalarField ghol = sample(g, [](const Vec3& x) { return std::exp(-cplx(x[0], x[1])); });
  CHECK_NOTHROW(build_amplitude(ghol, phi, {1.0, kI, 0.0}, 1e-2));
  const ScalarField gbad = sample(g, [](const Vec3& x) { return std::exp(-cplx(x[0], -x[1])); });
  CHECK_THROWS_AS(build_amplitude(gbad, phi, {1.0, kI, 0.0}, 1e-2), AmplitudeError);
}

TEST_CASE("conjugated expansion against the closed form") {
  const Vec3 xi{1.0, -0.5, 0.25};
  const Vec3 g1 = scale(Vec3{0.5, 1.0, 0.0}, 1 / std::sqrt(1.25));
  Vec3 g2{xi[1] * g1[2] - xi[2] * g1[1], xi[2] * g1[0] - xi[0] * g1[2], xi[0] * g1[1] - xi[1] * g1[0]};
  g2 = scale(g2, 1.0 / norm(g2));
  const CgoSpec s = CgoParams::make(0.125, xi, g1, g2).first();
  ConjugatedPoint pt{cplx(0.7, -0.2), {cplx(0.3, 0.1), cplx(-0.2, 0.4), cplx(0.05, 0.0)}, cplx(1.1, -0.6),
                     {0.4, -0.3, 0.2}, {0.35, -0.25, 0.1}, 0.8, cplx(1.5, -0.3)};
  const double k = 1.3, h = s.h;
  // e^{-x.zeta/h} h^2 (L - k^2) e^{x.zeta/h} a with zeta . zeta = 0.
  cplx zg = 0.0, Az = 0.0, Ag = 0.0;
  for (int d = 0; d < 3; ++d) {
    zg += s.zeta[d] * pt.grad_a[d];
    Az += pt.A[d] * s.zeta[d];
    Ag += pt.A[d] * pt.grad_a[d];
  }
  const cplx exact = -h * h * pt.lap_a - 2.0 * h * zg - 2.0 * kI * h * Az * pt.a - 2.0 * kI * h * h * Ag -
                     kI * h * h * pt.div_A * pt.a + h * h * dot(pt.A, pt.A) * pt.a + h * h * pt.q * pt.a -
                     h * h * k * k * pt.a;
  CHECK(std::abs(conjugated_expansion(pt, s, k).total() - exact) < 1e-13);
}

TEST_CASE("conjugated residual and remainder vanish for trivial data") {
  const Grid3 g = cube(1.0, 16);
  const CgoSpec s = CgoParams::make(0.1, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}).first();
  const ScalarField one(g, 1.0);
  const VectorField3 A0(g);
  const ScalarField q0(g);
  const ConjugatedResidual r = conjugated_residual(one, s, A0, A0, q0, 0.0);
  CHECK(r.sup < 1e-14);
  const RemainderResult rem = solve_remainder(one, s, A0, A0, q0, 0.0);
  CHECK(sup_norm(rem.r) < 1e-14);
}

TEST_CASE("remainder solve satisfies its equation") {
  const Grid3 g = cube(1.0, 20);
  const CgoSpec s = CgoParams::make(0.125, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}).first();
  const Bump b{{0.0, 0.0, 0.0}, 0.3, 0.8, 0.5};
  const VectorField3 A = bump_field(g, b, {0.5, -0.3, 0.2});
  const ScalarField q = sample(g, [&](const Vec3& x) { return 2.0 * b.value(x); });
  const ScalarField a = build_amplitude(solve_transport_phase(A, s.zeta0, s.frame));
  for (auto bc : {RemainderBoundary::MinimalNorm, RemainderBoundary::Dirichlet}) {
    RemainderOptions o;
    o.boundary = bc;
    const RemainderResult r = solve_remainder(a, s, A, A, q, 1.0, o);
    CHECK(r.relative_residual < 1e-9);
    CHECK(std::isfinite(sup_norm(r.r)));
  }
}
