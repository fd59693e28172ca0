#include <fftw3.h>

#include <cmath>
#include <filesystem>

#include "cgoh/field_io.hpp"
#include "cgoh/fields.hpp"
#include "cgoh/potentials.hpp"
#include "doctest.h"

using namespace cgoh;

namespace {

Grid3 cube(double lo, double hi, int n) { return Grid3(Box3{{lo, lo, lo}, {hi, hi, hi}}, n); }

double max_interior(const ScalarField& f, int margin = 1) {
  double m = 0.0;
  const IndexBox in = f.grid.interior(margin);
  for (int k = in.lo[2]; k <= in.hi[2]; ++k)
    for (int j = in.lo[1]; j <= in.hi[1]; ++j)
      for (int i = in.lo[0]; i <= in.hi[0]; ++i) m = std::max(m, std::abs(f(i, j, k)));
  return m;
}

}  // namespace

TEST_CASE("sampling matches per-node evaluation") {
  const Grid3 g = cube(-1, 1, 9);
  const ScalarField z = sample(g, [](const Vec3&) { return 0.0; });
  const ScalarField one = sample(g, [](const Vec3&) { return 1.0; });
  const ScalarField e = sample(g, [](const Vec3& x) { return std::exp(-dot(x, x)); });
  for (int k = 0; k < 9; ++k)
    for (int j = 0; j < 9; ++j)
      for (int i = 0; i < 9; ++i) {
        const double x = -1 + 0.25 * i, y = -1 + 0.25 * j, w = -1 + 0.25 * k;
        CHECK(z(i, j, k) == 0.0);
        CHECK(one(i, j, k) == 1.0);
        CHECK(std::abs(e(i, j, k) - std::exp(-(x * x + y * y + w * w))) < 1e-15);
      }
}

TEST_CASE("grid symmetric about the plane") {
  const Grid3 g(Box3{{-2, -2, -2}, {2, 2, 2}}, {16, 16, 17});
  CHECK(g.symmetric_about_plane());
  CHECK(g.plane_row() == 8);
  CHECK(g.coord(2, g.plane_row()) == doctest::Approx(0.0));
  CHECK(g.coord(2, 3) == doctest::Approx(-g.coord(2, g.mirror_row(3))));
  const Grid3 even(Box3{{-2, -2, -2}, {2, 2, 2}}, {16, 16, 16});
  CHECK_FALSE(even.symmetric_about_plane());
}

TEST_CASE("gradient of constants and affine fields") {
  const Grid3 g = cube(-1, 1, 12);
  const VectorField3 gc = gradient(sample(g, [](const Vec3&) { return 3.0; }));
  CHECK(sup_norm(gc) < 1e-12);
  const VectorField3 gx = gradient(sample(g, [](const Vec3& x) { return x[0]; }));
  for (std::size_t n = 0; n < g.size(); ++n) {
    CHECK(std::abs(gx.c[0][n] - 1.0) < 1e-12);
    CHECK(std::abs(gx.c[1][n]) < 1e-12);
    CHECK(std::abs(gx.c[2][n]) < 1e-12);
  }
}

TEST_CASE("gradient of sin(x1) converges at second order") {
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const Grid3 g = cube(-1, 1, r == 0 ? 17 : 33);
    const ScalarField f = sample(g, [](const Vec3& x) { return std::sin(x[0]); });
    const ScalarField ex = sample(g, [](const Vec3& x) { return std::cos(x[0]); });
    err[r] = max_interior(gradient(f).component(0) - ex);
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 1.9);
  CHECK(order < 2.1);
}

TEST_CASE("curl of hand-computable and gradient fields") {
  const Grid3 g = cube(-1, 1, 16);
  const VectorField3 F = sample_vector(g, [](const Vec3& x) { return Vec3{0.0, 0.0, x[0]}; });
  const VectorField3 c = curl(F);
  for (std::size_t n = 0; n < g.size(); ++n) {
    CHECK(std::abs(c.c[0][n]) < 1e-12);
    CHECK(std::abs(c.c[1][n] + 1.0) < 1e-12);
    CHECK(std::abs(c.c[2][n]) < 1e-12);
  }
  // Central differences commute, so curl(grad f) vanishes to round-off away
  // from the one-sided face stencils.
  const Grid3 gr = cube(-1, 1, 17);
  const VectorField3 cg =
      curl(gradient(sample(gr, [](const Vec3& x) { return std::sin(2 * x[0]) * std::cos(x[1] + x[2]); })));
  for (int d = 0; d < 3; ++d) CHECK(max_interior(cg.component(d), 2) < 1e-12);
}

namespace {

// Relative L2 gap between the finite-difference curl and the FFT curl of one
// period of a compactly supported field.
double spectral_curl_gap(int n) {
  const double L = 2.0;
  const Grid3 g(Box3{{-L, -L, -L}, {L - 2 * L / n, L - 2 * L / n, L - 2 * L / n}}, n);
  Rng rng(11);
  VectorBumpSet set;
  for (int b = 0; b < 3; ++b)
    set.bumps.push_back({Bump{{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)},
                              rng.uniform(0.35, 0.45), 1.5, 0.5},
                         {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}});
  const VectorField3 F = sample_vector(g, [&](const Vec3& x) { return set(x); });
  const VectorField3 c = curl(F);

  std::array<std::vector<cplx>, 3> hat;
  for (int d = 0; d < 3; ++d) {
    hat[d] = F.c[d];
    fftw_plan p = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(hat[d].data()),
                                   reinterpret_cast<fftw_complex*>(hat[d].data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
  }
  std::array<std::vector<cplx>, 3> sc;
  for (auto& v : sc) v.assign(g.size(), 0.0);
  const double dk = 2 * kPi / (2 * L);
  auto wave = [&](int m) { return (m < n / 2 ? m : (m == n / 2 ? 0 : m - n)) * dk; };
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        // fftw is row-major, so x (fastest in our layout) is its last index.
        const std::size_t idx = g.index(i, j, k);
        const cplx kx = kI * wave(i), ky = kI * wave(j), kz = kI * wave(k);
        sc[0][idx] = ky * hat[2][idx] - kz * hat[1][idx];
        sc[1][idx] = kz * hat[0][idx] - kx * hat[2][idx];
        sc[2][idx] = kx * hat[1][idx] - ky * hat[0][idx];
      }
  VectorField3 ref(g, false);
  for (int d = 0; d < 3; ++d) {
    fftw_plan p = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(sc[d].data()),
                                   reinterpret_cast<fftw_complex*>(sc[d].data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
    for (std::size_t q = 0; q < g.size(); ++q) ref.c[d][q] = sc[d][q] / double(g.size());
  }
  return l2_norm(c - ref) / l2_norm(ref);
}

}  // namespace

TEST_CASE("curl of a compactly supported field against an FFT spectral curl") {
  const double e48 = spectral_curl_gap(48), e96 = spectral_curl_gap(96);
  MESSAGE("finite-difference vs spectral curl: " << e48 << " at 48^3, " << e96 << " at 96^3");
  CHECK(e48 < 2e-2);
  CHECK(std::log2(e48 / e96) > 1.9);
}

TEST_CASE("norms and quadrature") {
  const Grid3 g = cube(0, 1, 64);
  const Norms z = norms(ScalarField(g), 0.1);
  CHECK(z.l2 == 0.0);
  CHECK(z.sup == 0.0);
  CHECK(z.h1_scl == 0.0);
  CHECK(norms(ScalarField(g, 1.0), 0.1).l2 == doctest::Approx(1.0).epsilon(1e-12));
  const ScalarField s = sample(g, [](const Vec3& x) { return std::sin(kPi * x[0]); });
  CHECK(std::abs(l2_norm(s) - 1.0 / std::sqrt(2.0)) < 1e-4);
  const ScalarField lin = sample(g, [](const Vec3& x) { return 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[2]; });
  CHECK(std::abs(integrate(lin) - 3.0) < 1e-12);
}

TEST_CASE("fourier samples of a Gaussian against the closed form") {
  const double sig = 0.3;
  const Grid3 g = cube(-2.5, 2.5, 81);
  const ScalarField f = sample(g, [&](const Vec3& x) { return std::exp(-dot(x, x) / (2 * sig * sig)); });
  CHECK(std::abs(fourier_sample(ScalarField(g), {1, 2, 3})) == 0.0);
  CHECK(std::abs(fourier_sample(f, {0, 0, 0}) - integrate(f)) < 1e-12);
  for (const Vec3 xi : {Vec3{1, 0, 0}, Vec3{2, -1, 3}, Vec3{4, 4, -2}}) {
    const double exact = std::pow(2 * kPi * sig * sig, 1.5) * std::exp(-sig * sig * dot(xi, xi) / 2);
    CHECK(std::abs(fourier_sample(f, xi) - exact) < 1e-10);
  }
}

TEST_CASE("fft3 agrees with fourier_sample on its lattice") {
  const Grid3 g = cube(-1, 1 - 2.0 / 16, 16);
  const Bump b{{0.05, -0.1, 0.0}, 0.25, 0.8, 0.5};
  const ScalarField f = sample(g, [&](const Vec3& x) { return b.value(x) * (1.0 + x[0]); });
  const LatticeSpectrum s = fft3(f);
  for (const auto& m : {std::array<int, 3>{0, 0, 0}, {1, 2, 3}, {15, 1, 9}}) {
    const Vec3 xi = s.xi(m[0], m[1], m[2]);
    CHECK(std::abs(s.at(m[0], m[1], m[2]) - fourier_sample(f, xi)) < 1e-8);
  }
}

TEST_CASE("interpolation reproduces low-order polynomials") {
  const Grid3 g = cube(-1, 1, 11);
  auto quad = [](const Vec3& x) { return 1.0 + x[0] * x[1] - 2.0 * x[2] * x[2] + 0.5 * x[0]; };
  auto lin = [](const Vec3& x) { return 1.0 + x[0] - 2.0 * x[1] + 0.25 * x[2]; };
  const ScalarField fq = sample(g, quad), fl = sample(g, lin);
  for (const Vec3 x : {Vec3{0.13, -0.41, 0.27}, Vec3{-0.55, 0.62, -0.08}}) {
    CHECK(std::abs(interpolate(fl, x, Interp::Trilinear) - lin(x)) < 1e-12);
    CHECK(std::abs(interpolate(fq, x, Interp::Tricubic) - quad(x)) < 1e-12);
  }
  CHECK(interpolate(fl, {3, 0, 0}) == 0.0);
}

TEST_CASE("field dump round trip") {
  const Grid3 g(Box3{{-1, -2, -3}, {1, 2, 3}}, {5, 6, 7});
  const ScalarField f = sample(g, [](const Vec3& x) { return cplx(x[0], x[1] * x[2]); });
  const VectorField3 V = sample_vector(g, [](const Vec3& x) { return Vec3{x[2], -x[0], 0.5}; });
  const auto dir = std::filesystem::temp_directory_path() / "cgoh_io_test";
  std::filesystem::create_directories(dir);
  io::write_field((dir / "f.cgf").string(), f, {{"role", "test"}});
  io::write_field((dir / "V.cgf").string(), V, {{"role", "test"}});
  const ScalarField f2 = io::read_scalar((dir / "f.cgf").string());
  const VectorField3 V2 = io::read_vector((dir / "V.cgf").string());
  CHECK(f2.grid.same_as(g));
  CHECK(f2.v == f.v);
  for (int d = 0; d < 3; ++d) CHECK(V2.c[d] == V.c[d]);
  CHECK(std::filesystem::exists(dir / "f.cgf.json"));
  std::filesystem::remove_all(dir);
}
