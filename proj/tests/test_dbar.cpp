#include <algorithm>
#include <cmath>

#include "cgoh/dbar.hpp"
#include "cgoh/potentials.hpp"
#include "doctest.h"

using namespace cgoh;

namespace {

double max_inner(const PlaneField& f, cplx target, int margin = 1) {
  double m = 0.0;
  for (int j = margin; j < f.grid.n[1] - margin; ++j)
    for (int i = margin; i < f.grid.n[0] - margin; ++i) m = std::max(m, std::abs(f(i, j) - target));
  return m;
}

double relative_gap(const PlaneField& a, const PlaneField& b) {
  PlaneField d(a.grid);
  for (std::size_t n = 0; n < d.v.size(); ++n) d.v[n] = a.v[n] - b.v[n];
  return l2_norm(d) / l2_norm(b);
}

// Compactly supported test function on [-1, 1]^2.
cplx bumpy(cplx z) {
  const Bump b{{0.1, -0.05, 0.0}, 0.22, 0.8, 0.5};
  return cplx(1.0, 0.5) * b.value({z.real(), z.imag(), 0.0}) * (1.0 + 0.3 * z);
}

}  // namespace

TEST_CASE("dbar of constants, z and conj z") {
  const Grid2 g({-1, -1}, {1, 1}, {33, 29});
  CHECK(max_inner(dbar_apply(PlaneField(g, cplx(2, -1))), 0.0, 0) < 1e-12);
  CHECK(max_inner(dbar_apply(sample_plane(g, [](cplx z) { return z; })), 0.0) < 1e-12);
  CHECK(max_inner(dbar_apply(sample_plane(g, [](cplx z) { return std::conj(z); })), 1.0) < 1e-12);
}

TEST_CASE("cauchy transform of zero and of a Gaussian") {
  const Grid2 g({-6, -6}, {6, 6}, {257, 257});
  const PlaneField z = cauchy_transform(PlaneField(g));
  CHECK(l2_norm(z) == 0.0);
  // (1/pi) int exp(-|w|^2) / (z - w) dA(w) = (1 - exp(-|z|^2)) / z.
  const PlaneField f = sample_plane(g, [](cplx w) { return std::exp(-std::norm(w)); });
  const PlaneField exact = sample_plane(g, [](cplx w) { return std::abs(w) < 1e-14 ? cplx(0.0) : (1.0 - std::exp(-std::norm(w))) / w; });
  const double e1 = relative_gap(cauchy_transform(f), exact);
  const Grid2 gc({-6, -6}, {6, 6}, {129, 129});
  const double e0 = relative_gap(cauchy_transform(sample_plane(gc, [](cplx w) { return std::exp(-std::norm(w)); })),
                                 sample_plane(gc, [](cplx w) {
                                   return std::abs(w) < 1e-14 ? cplx(0.0) : (1.0 - std::exp(-std::norm(w))) / w;
                                 }));
  MESSAGE("Gaussian Cauchy transform error " << e0 << " -> " << e1);
  CHECK(e1 < 1e-3);
  CHECK(std::log2(e0 / e1) > 1.8);
}

TEST_CASE("cauchy transform inverts dbar on compact data") {
  const Grid2 g({-1, -1}, {1, 1}, {256, 256});
  const PlaneField u = sample_plane(g, bumpy);
  CHECK(relative_gap(cauchy_transform(dbar_apply(u)), u) <= 1e-3);
  CHECK(relative_gap(dbar_apply(cauchy_transform(u)), u) <= 1e-3);
}

TEST_CASE("cell-averaged kernel") {
  const double d = 0.1;
  CHECK(std::abs(cauchy_kernel_cell_average(0.0, 0.0, d, d)) < 1e-12);
  const cplx far = cauchy_kernel_cell_average(3.0, 1.0, d, d);
  CHECK(std::abs(far - 1.0 / (kPi * cplx(3.0, 1.0))) < 1e-5);
  // Gauss-Legendre average over the neighbouring cell.
  const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                       0.2369268850561891};
  cplx acc = 0.0;
  const int sub = 16;
  for (int a = 0; a < sub; ++a)
    for (int b = 0; b < sub; ++b)
      for (int p = 0; p < 5; ++p)
        for (int q = 0; q < 5; ++q) {
          const double sx = 0.5 * d + d * (a + 0.5 * (1 + x[p])) / sub;
          const double sy = -0.5 * d + d * (b + 0.5 * (1 + x[q])) / sub;
          acc += w[p] * w[q] / 4.0 / (sub * sub) / (kPi * cplx(sx, sy));
        }
  CHECK(std::abs(cauchy_kernel_cell_average(d, 0.0, d, d) - acc) < 1e-8 * std::abs(acc));
}

TEST_CASE("contour integrals and the interior Cauchy formula") {
  const Contour c = circle(0.0, 1.0, 128);
  std::vector<cplx> inv(c.z.size()), sq(c.z.size()), one(c.z.size(), 1.0);
  for (std::size_t j = 0; j < c.z.size(); ++j) {
    inv[j] = 1.0 / c.z[j];
    sq[j] = c.z[j] * c.z[j];
  }
  CHECK(std::abs(contour_integral(c, inv) - 2.0 * kPi * kI) < 1e-12);
  CHECK(std::abs(contour_integral(c, sq)) < 1e-12);
  CHECK(std::abs(plemelj_interior(c, one, cplx(0.3, -0.2)) - 1.0) < 1e-12);
  CHECK(std::abs(plemelj_interior(c, one, cplx(1.7, 0.4))) < 1e-12);
  const Contour c2 = circle(0.0, 2.0, 256);
  std::vector<cplx> sq2(c2.z.size());
  for (std::size_t j = 0; j < c2.z.size(); ++j) sq2[j] = c2.z[j] * c2.z[j];
  CHECK(std::abs(plemelj_interior(c2, sq2, cplx(1.0, 0.0)) - 1.0) < 1e-10);
}

TEST_CASE("winding numbers") {
  CHECK(winding_number(circle(0.0, 1.0, 64)) == 1);
  Contour twice;
  for (int j = 0; j < 256; ++j) twice.z.push_back(std::exp(kI * (4.0 * kPi * j / 256)));
  CHECK(winding_number(twice) == 2);
  CHECK(winding_number(circle(cplx(3.0, 0.0), 1.0, 64)) == 0);
  Contour reversed = circle(0.0, 1.0, 64);
  std::reverse(reversed.z.begin(), reversed.z.end());
  CHECK(winding_number(reversed) == -1);
  // exp of a bounded function never winds around the origin.
  const Contour base = circle(0.0, 1.0, 512);
  Contour path;
  for (cplx z : base.z) path.z.push_back(std::exp(3.0 * std::conj(z) + 2.0 * kI * std::sin(2.0 * z)));
  CHECK(winding_number(path) == 0);
}

TEST_CASE("holomorphic log recovers the exponent") {
  const Grid2 g({-1, -1}, {1, 1}, {81, 81});
  auto w = [](cplx z) { return z * z + cplx(1.0, 0.5) + 2.0 * kI * z; };
  const PlaneField F = sample_plane(g, [&](cplx z) { return std::exp(w(z)); });
  std::vector<char> mask(g.size(), 0);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) mask[g.index(i, j)] = std::abs(g.node(i, j)) < 0.9;
  const PlaneField L = holomorphic_log(F, mask, 40, 40, w(g.node(40, 40)));
  double err = 0.0;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i)
      if (mask[g.index(i, j)]) err = std::max(err, std::abs(L(i, j) - w(g.node(i, j))));
  CHECK(err < 1e-12);
}
