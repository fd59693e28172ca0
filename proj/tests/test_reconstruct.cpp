#include <cmath>
#include <random>

#include "cgoh/reconstruct.hpp"
#include "cgoh/scenario.hpp"
#include "doctest.h"

using namespace cgoh;

namespace {

const char* kTiny = R"(name = tiny
h_sequence = 0.125 0.0625 0.03125
[grid]
n = 32 32 33
half_width = 2
[lattice]
n = 4
[potentials]
A1.0.center = 0.1 -0.1 -0.75
A1.0.sigma = 0.25
A1.0.radius = 0.7
A1.0.amplitude = 1 -0.5 0.7
A2.0.center = -0.15 0.1 -0.75
A2.0.sigma = 0.25
A2.0.radius = 0.7
A2.0.amplitude = -0.4 0.8 0.3
q1.0.center = 0 0 -0.75
q1.0.sigma = 0.25
q1.0.radius = 0.7
q1.0.amplitude = 2
q2.0.center = 0.1 0 -0.7
q2.0.sigma = 0.25
q2.0.radius = 0.7
q2.0.amplitude = 1 -0.3
)";

struct Tiny {
  Scenario sc = parse_scenario(kTiny, ".");
  ProblemSetup setup = build_setup(sc, false);
  ProblemSetup same{setup.A1, setup.A1, setup.q1, setup.q1, setup.k};
  LimitOptions limit() const {
    LimitOptions o = sc.limit_options();
    o.tolerance = std::numeric_limits<double>::infinity();
    return o;
  }
};

const Tiny& tiny() {
  static const Tiny t;
  return t;
}

const FourierSamples& tiny_samples() {
  static const FourierSamples fs = [] {
    PipelineOptions po;
    po.limit = tiny().limit();
    return fourier_samples_A(tiny().setup, tiny().sc.lattice(), po);
  }();
  return fs;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("gamma choice for an axis direction") {
  const GammaPair g = choose_gammas({1, 0, 0});
  CHECK(std::abs(std::abs(g.gamma1[1]) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(g.gamma2[2]) - 1.0) < 1e-15);
  CHECK(std::abs(g.gamma1[0]) + std::abs(g.gamma1[2]) < 1e-15);
  CHECK(std::abs(g.gamma2[0]) + std::abs(g.gamma2[1]) < 1e-15);
}

TEST_CASE("gamma choice satisfies the CGO restrictions") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (int t = 0; t < 50; ++t) {
    const Vec3 xi{N(rng), N(rng), N(rng)};
    const GammaPair g = choose_gammas(xi);
    CHECK(std::abs(norm(g.gamma1) - 1.0) < 1e-14);
    CHECK(std::abs(norm(g.gamma2) - 1.0) < 1e-14);
    CHECK(std::abs(dot(g.gamma1, g.gamma2)) < 1e-14);
    CHECK(std::abs(dot(g.gamma1, xi)) < 1e-13);
    CHECK(std::abs(dot(g.gamma2, xi)) < 1e-13);
    CHECK(g.gamma1[2] == 0.0);
    CHECK(std::abs(g.gamma2[2]) > 0.0);
    CHECK_NOTHROW(phase_products(CgoParams::make(0.1, xi, g.gamma1, g.gamma2)));
  }
  CHECK_THROWS_AS(choose_gammas({0, 0, 1}), ExclusionError);
  CHECK_THROWS_AS(choose_gammas({1e-15, 0, 1}), ExclusionError);
}

TEST_CASE("Filon weights integrate piecewise linear data exactly") {
  // f(x) = 1 + 2x on [0, 1]: int f e^{i w x} dx in closed form.
  for (double w : {0.0, 1e-3, 0.7, 9.0, 60.0}) {
    const int n = 11;
    const auto wt = filon_weights(0.0, 0.1, n, w);
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) s += wt[k] * (1.0 + 2.0 * 0.1 * k);
    cplx exact = 2.0;
    if (w != 0.0) {
      // int_0^1 e^{iwx} = (e - 1)/(iw), int_0^1 x e^{iwx} = e/(iw) + (e - 1)/w^2
      using cl = std::complex<long double>;
      const long double W = w;
      const cl e = std::exp(cl(0.0L, W)), i(0.0L, 1.0L);
      const cl x = (e - 1.0L) / (i * W) + 2.0L * (e / (i * W) + (e - 1.0L) / (W * W));
      exact = cplx(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    }
    CHECK(std::abs(s - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("spline Filon weights resolve a smooth bump at any frequency") {
  // f = exp(-x^2 / (2 s^2)) on [-2, 2]: transform sqrt(2 pi) s exp(-s^2 w^2 / 2).
  const double s = 0.3, dz = 0.0625;
  const int n = 65;
  for (double w : {0.0, 4.0, 20.0, 2 * kPi / dz - 3.0, 2 * kPi / dz + 4.0}) {
    const auto wt = spline_filon_weights(-2.0, dz, n, w);
    cplx v = 0.0;
    for (int k = 0; k < n; ++k) {
      const double x = -2.0 + k * dz;
      v += wt[k] * std::exp(-x * x / (2 * s * s));
    }
    const double exact = std::sqrt(2 * kPi) * s * std::exp(-s * s * w * w / 2);
    CHECK(std::abs(v - exact) < 1e-4 * std::sqrt(2 * kPi) * s);
  }
}

TEST_CASE("Richardson step removes a pure power") {
  const double p = 2.0 / 3.0;
  auto t = [&](double h) { return cplx(1.5, -0.25) + cplx(0.3, 0.7) * std::pow(h, p); };
  CHECK(std::abs(richardson(t(0.1), t(0.05), 2.0, p) - cplx(1.5, -0.25)) < 1e-13);
}

TEST_CASE("frequency lattice indexing") {
  XiLattice L;
  L.n = 6;
  L.dxi = 0.4;
  for (std::size_t i = 0; i < L.count(); ++i) {
    const auto m = L.m(i);
    CHECK(L.index(m) == i);
    CHECK(L.contains(m));
    const Vec3 xi = L.xi(i);
    for (int d = 0; d < 3; ++d) CHECK(xi[d] == doctest::Approx(m[d] * 0.4));
    CHECK(L.on_line(i) == (m[0] == 0 && m[1] == 0));
  }
  CHECK_FALSE(L.contains({3, 0, 0}));
  CHECK(L.contains({-3, 0, 0}));
}

TEST_CASE("h values must keep the CGO directions real") {
  LimitOptions o;
  CHECK(limit_h_values(o, {1, 1, 1}).size() == 3);
  CHECK_THROWS_AS(limit_h_values(o, {200.0, 0, 0}), ParameterError);
}

TEST_CASE("amplitude strip with zero phases is the identity") {
  const Grid3 g(Box3{{-1, -1, -1}, {1, 1, 1}}, 12);
  const VectorField3 A = sample_vector(g, [](const Vec3& x) { return Vec3{x[1], 0.0, x[0]}; });
  const AmplitudeStrip s = strip_amplitude(ScalarField(g), ScalarField(g), {1.0, kI, 0.0}, A, A, 1e-12);
  for (const auto& v : s.g.v) CHECK(v == cplx(1.0));
  CHECK(s.residual == 0.0);
}

TEST_CASE("identical potentials give vanishing identity terms") {
  const Tiny& t = tiny();
  const Vec3 xi{kPi / 2, kPi / 2, kPi / 2};
  const GammaPair gp = choose_gammas(xi);
  for (double h : {0.125, 0.03125}) {
    const IdentityTerms r = cgo_pair_integral(t.same, CgoParams::make(h, xi, gp.gamma1, gp.gamma2));
    CHECK(std::abs(r.magnetic_term) < 1e-10);
    CHECK(std::abs(r.zero_order_term) < 1e-10);
  }
  const LimitResult z = limit_identity(t.same, xi, 1, IdentityKind::Magnetic, t.limit());
  CHECK(std::abs(z.direct) < 1e-12);
  CHECK(std::abs(z.extrapolated) < 1e-10);
}

TEST_CASE("scaled zero-order term vanishes linearly in h") {
  const Tiny& t = tiny();
  const Vec3 xi{kPi / 2, -kPi / 2, 0.0};
  const GammaPair gp = choose_gammas(xi);
  std::vector<double> hz, hs{0.125, 0.0625, 0.03125};
  for (double h : hs) hz.push_back(h * std::abs(cgo_pair_integral(t.setup, CgoParams::make(h, xi, gp.gamma1, gp.gamma2)).zero_order_term));
  CHECK(std::log2(hz[0] / hz[1]) >= 0.9);
  CHECK(std::log2(hz[1] / hz[2]) >= 0.9);
}

TEST_CASE("cross terms of the reflected pair decay along the h sequence") {
  const Tiny& t = tiny();
  const LimitResult r = limit_identity(t.setup, {kPi / 2, kPi / 2, kPi / 2}, 1, IdentityKind::Magnetic, t.limit());
  std::vector<double> cross;
  for (const auto& row : r.table) cross.push_back(std::abs(row.pair_terms[1]) + std::abs(row.pair_terms[2]));
  REQUIRE(cross.size() >= 3);
  MESSAGE("cross terms: " << cross[0] << " " << cross[1] << " " << cross[2]);
  for (std::size_t i = 1; i < cross.size(); ++i) CHECK(cross[i] < cross[i - 1]);
}

TEST_CASE("remainder correction contributes at lower order") {
  const Tiny& t = tiny();
  const Vec3 xi{kPi / 2, 0.0, kPi / 2};
  const GammaPair gp = choose_gammas(xi);
  PairOptions on;
  on.with_remainder = true;
  std::vector<double> gap;
  for (double h : {0.125, 0.0625, 0.03125}) {
    const CgoParams p = CgoParams::make(h, xi, gp.gamma1, gp.gamma2);
    gap.push_back(h * std::abs(cgo_pair_integral(t.setup, p, on).magnetic_term -
                               cgo_pair_integral(t.setup, p).magnetic_term));
  }
  MESSAGE("h * |with - without remainder|: " << gap[0] << " " << gap[1] << " " << gap[2]);
  CHECK(gap[1] < gap[0]);
  CHECK(gap[2] < gap[1]);
}

TEST_CASE("extrapolated limit agrees with the direct quadrature and the plain transform") {
  const Tiny& t = tiny();
  const Workspace ws = Workspace::make(t.setup);
  const VectorField3 dA = t.setup.A2 - t.setup.A1;
  for (int sign : {1, -1}) {
    const Vec3 xi{kPi / 2, -kPi / 2, kPi / 2};
    const LimitResult r = limit_identity(t.setup, xi, sign, IdentityKind::Magnetic, t.limit());
    CHECK(r.discrepancy < 2e-2);
    GammaPair gp = choose_gammas(xi);
    gp.gamma2 = scale(gp.gamma2, sign);
    const cplx plain = dot(complexify(gp.gamma1, gp.gamma2), fourier_sample(dA, xi));
    CHECK(std::abs(r.direct - plain) / ws.scale_A < 1e-3);
  }
}

TEST_CASE("pipeline samples agree with standalone limits") {
  const Tiny& t = tiny();
  const FourierSamples& fs = tiny_samples();
  CHECK(fs.flagged_count() == 0);
  for (const auto& m : {std::array<int, 3>{1, 1, 1}, std::array<int, 3>{-2, 1, 0}, std::array<int, 3>{0, -1, -2}}) {
    const std::size_t i = fs.lattice.index(m);
    const Vec3 xi = fs.lattice.xi(i);
    for (int s = 0; s < 2; ++s) {
      const LimitResult r = limit_identity(t.setup, xi, s == 0 ? 1 : -1, IdentityKind::Magnetic, t.limit());
      CHECK(std::abs(fs.points[i].extrapolated[s] - r.extrapolated) < 1e-4 * fs.scale);
      CHECK(std::abs(fs.points[i].direct[s] - r.direct) < 1e-4 * fs.scale);
    }
  }
}

TEST_CASE("measured components match the transform of the difference") {
  const Tiny& t = tiny();
  const FourierSamples& fs = tiny_samples();
  const VectorField3 dA = t.setup.A2 - t.setup.A1;
  double worst = 0.0, sym = 0.0;
  for (std::size_t i = 0; i < fs.lattice.count(); ++i) {
    if (!fs.measured[i]) continue;
    const Vec3 xi = fs.lattice.xi(i);
    const GammaPair gp = choose_gammas(xi);
    const CVec3 F = fourier_sample(dA, xi);
    worst = std::max(worst, std::abs(dot(gp.gamma1, fs.v[i]) - dot(gp.gamma1, F)) / fs.scale);
    worst = std::max(worst, std::abs(dot(gp.gamma2, fs.v[i]) - dot(gp.gamma2, F)) / fs.scale);
    auto mm = fs.lattice.m(i);
    for (auto& c : mm) c = -c;
    if (fs.lattice.contains(mm) && fs.measured[fs.lattice.index(mm)]) {
      const CVec3& w = fs.v[fs.lattice.index(mm)];
      for (int d = 0; d < 3; ++d) sym = std::max(sym, std::abs(w[d] - std::conj(fs.v[i][d])) / fs.scale);
    }
  }
  CHECK(worst < 2e-2);
  CHECK(sym < 2e-2);
}

TEST_CASE("curl synthesis ignores the xi-parallel component") {
  const FourierSamples& fs = tiny_samples();
  FourierSamples p = fs;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (std::size_t i = 0; i < p.lattice.count(); ++i) {
    const Vec3 xi = p.lattice.xi(i);
    const cplx c(N(rng), N(rng));
    for (int d = 0; d < 3; ++d) p.v[i][d] += c * xi[d];
  }
  const auto a = curl_spectrum(fs), b = curl_spectrum(p);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int d = 0; d < 3; ++d) {
      diff = std::max(diff, std::abs(a[i][d] - b[i][d]));
      ref = std::max(ref, std::abs(a[i][d]));
    }
  CHECK(diff <= 1e-12 * ref);
}

TEST_CASE("zero samples synthesise zero fields") {
  const Grid3 g(Box3{{-2, -2, -2}, {2, 2, 2}}, {16, 16, 17});
  FourierSamples fs;
  fs.lattice.n = 4;
  fs.v.assign(fs.lattice.count(), CVec3{});
  fs.s.assign(fs.lattice.count(), 0.0);
  fs.measured.assign(fs.lattice.count(), 1);
  fs.flagged.assign(fs.lattice.count(), 0);
  fs.points.resize(fs.lattice.count());
  for (std::size_t i = 0; i < fs.lattice.count(); ++i)
    if (fs.lattice.on_line(i)) fs.measured[i] = 0;
  CHECK(sup_norm(recover_curl(fs, g)) == 0.0);
  fs.scalar = true;
  CHECK(sup_norm(recover_q(fs, g)) == 0.0);
}

TEST_CASE("scalar synthesis inverts exact transform samples") {
  // A Gaussian is well resolved on the 16^3 lattice with spacing pi/2.
  const Grid3 g(Box3{{-2, -2, -2}, {2, 2, 2}}, {40, 40, 41});
  const ScalarField q = sample(g, [](const Vec3& x) {
    return cplx(std::exp(-dot(x, x) / (2 * 0.3 * 0.3)), 0.0);
  });
  FourierSamples fs;
  fs.scalar = true;
  fs.lattice.n = 16;
  const std::size_t n = fs.lattice.count();
  fs.s.resize(n);
  fs.v.assign(n, CVec3{});
  fs.measured.assign(n, 1);
  fs.flagged.assign(n, 0);
  fs.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Closed-form transform of the Gaussian.
    const Vec3 xi = fs.lattice.xi(i);
    fs.s[i] = std::pow(2 * kPi * 0.09, 1.5) * std::exp(-0.09 * dot(xi, xi) / 2);
    if (fs.lattice.on_line(i)) fs.measured[i] = 0;
  }
  fs.scale = 1.0;
  const ScalarField r = recover_q(fs, g);
  CHECK(relative_l2(r, q, g.interior(4)) < 2e-2);
  double im = 0.0;
  for (const auto& v : r.v) im = std::max(im, std::abs(v.imag()));
  CHECK(im < 1e-10);
}
