#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "cgoh/cgo.hpp"
#include "cgoh/fft.hpp"

namespace cgoh {

namespace {

constexpr double kFrameTol = 1e-10;

bool unit(const Vec3& v) { return std::abs(norm(v) - 1.0) <= kFrameTol; }

}  // namespace

Frame Frame::from(const Vec3& alpha, const Vec3& beta) {
  Frame f;
  f.alpha = alpha;
  f.beta = beta;
  f.gamma = cross(alpha, beta);
  f.validate();
  return f;
}

void Frame::validate() const {
  if (!unit(alpha) || !unit(beta) || !unit(gamma) || std::abs(dot(alpha, beta)) > kFrameTol ||
      std::abs(dot(alpha, gamma)) > kFrameTol || std::abs(dot(beta, gamma)) > kFrameTol)
    throw ArgumentError("frame: vectors are not orthonormal");
  const Vec3 c = cross(alpha, beta);
  if (norm(sub(c, gamma)) > kFrameTol) throw ArgumentError("frame: not right-handed");
}

ZetaPair make_zeta_pair(double h, const Vec3& xi, const Vec3& g1, const Vec3& g2) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("zeta pair: h must be positive");
  const double disc = 1.0 - h * h * dot(xi, xi) / 4.0;
  if (!(disc > 0.0)) throw ParameterError("zeta pair: h |xi| >= 2, square root not real");
  const double xin = norm(xi);
  if (!unit(g1) || !unit(g2) || std::abs(dot(g1, g2)) > kFrameTol || std::abs(dot(g1, xi)) > kFrameTol * std::max(1.0, xin) ||
      std::abs(dot(g2, xi)) > kFrameTol * std::max(1.0, xin))
    throw ParameterError("zeta pair: gamma1, gamma2 must be orthonormal and orthogonal to xi");
  const double s = std::sqrt(disc);
  ZetaPair z;
  for (int d = 0; d < 3; ++d) {
    z.zeta1[d] = cplx(g1[d], 0.5 * h * xi[d] + s * g2[d]);
    z.zeta2[d] = cplx(-g1[d], -0.5 * h * xi[d] + s * g2[d]);
  }
  return z;
}

CgoParams CgoParams::make(double h, const Vec3& xi, const Vec3& g1, const Vec3& g2) {
  CgoParams p;
  p.h = h;
  p.xi = xi;
  p.gamma1 = g1;
  p.gamma2 = g2;
  p.zeta = make_zeta_pair(h, xi, g1, g2);
  p.epsilon = std::cbrt(h);
  return p;
}

CgoSpec CgoParams::first() const {
  CgoSpec s;
  s.h = h;
  s.zeta = zeta.zeta1;
  s.frame = Frame::from(gamma1, gamma2);
  s.zeta0 = s.frame.zeta0();
  return s;
}

CgoSpec CgoParams::second() const {
  CgoSpec s;
  s.h = h;
  s.zeta = zeta.zeta2;
  s.frame = Frame::from(scale(gamma1, -1.0), gamma2);
  s.zeta0 = s.frame.zeta0();
  return s;
}

// ---- mollification ------------------------------------------------------------

namespace {

double bump_integral() {
  // 4 pi int_0^1 r^2 exp(-1/(1-r^2)) dr, composite Simpson.
  static const double value = [] {
    const int n = 20000;
    auto f = [](double r) { return r < 1.0 ? r * r * std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / n);
    return 4.0 * kPi * acc / (3.0 * n);
  }();
  return value;
}

using KernelKey = std::tuple<int, int, int, double, double, double, double>;

// Spectrum of the discrete mollifier on the periodic grid, normalised to unit
// discrete mass.
std::shared_ptr<const std::vector<cplx>> mollifier_spectrum(const Grid3& g, double eps) {
  static std::mutex mutex;
  static std::map<KernelKey, std::shared_ptr<const std::vector<cplx>>> cache;
  const KernelKey key{g.n(0), g.n(1), g.n(2), g.h(0), g.h(1), g.h(2), eps};
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto k = std::make_shared<std::vector<cplx>>(g.size(), 0.0);
  int r[3];
  for (int d = 0; d < 3; ++d) r[d] = static_cast<int>(std::ceil(eps / g.h(d)));
  double mass = 0.0;
  for (int c = -r[2]; c <= r[2]; ++c)
    for (int b = -r[1]; b <= r[1]; ++b)
      for (int a = -r[0]; a <= r[0]; ++a) {
        const double v = mollifier({a * g.h(0), b * g.h(1), c * g.h(2)}, eps);
        if (v == 0.0) continue;
        const int i = (a % g.n(0) + g.n(0)) % g.n(0), j = (b % g.n(1) + g.n(1)) % g.n(1),
                  l = (c % g.n(2) + g.n(2)) % g.n(2);
        (*k)[g.index(i, j, l)] += v;
        mass += v;
      }
  for (auto& v : *k) v /= mass;
  fft::transform({g.n(2), g.n(1), g.n(0)}, k->data(), -1);
  std::lock_guard lock(mutex);
  if (cache.size() > 32) cache.clear();
  return cache.emplace(key, std::move(k)).first->second;
}

void check_resolution(const Grid3& g, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("mollify: eps must be positive");
  const double hmax = std::max({g.h(0), g.h(1), g.h(2)});
  if (eps < 2.0 * hmax) {
    std::ostringstream os;
    os << "mollify: eps=" << eps << " below grid resolution (needs >= 2 cells of " << hmax << ")";
    throw ResolutionError(os.str());
  }
  for (int d = 0; d < 3; ++d)
    if (2.0 * eps >= g.box().hi[d] - g.box().lo[d]) throw ResolutionError("mollify: eps exceeds the grid box");
}

std::vector<cplx> convolve(const Grid3& g, std::vector<cplx> data, double eps) {
  const auto kh = mollifier_spectrum(g, eps);
  fft::transform({g.n(2), g.n(1), g.n(0)}, data.data(), -1);
  const double s = 1.0 / static_cast<double>(g.size());
  for (std::size_t n = 0; n < data.size(); ++n) data[n] *= (*kh)[n] * s;
  fft::transform({g.n(2), g.n(1), g.n(0)}, data.data(), +1);
  return data;
}

}  // namespace

double mollifier(const Vec3& x, double eps) {
  const double r2 = dot(x, x) / (eps * eps);
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2)) / (bump_integral() * eps * eps * eps);
}

Mollified mollify(const VectorField3& A, double eps) {
  const Grid3& g = A.grid;
  check_resolution(g, eps);
  if (sup_norm(A) == 0.0) return {VectorField3(g, A.real_valued), VectorField3(g, A.real_valued)};
  const IndexBox sb = support_box(A, 0.0);
  for (int d = 0; d < 3; ++d) {
    const double lo_gap = g.coord(d, sb.lo[d]) - g.box().lo[d];
    const double hi_gap = g.box().hi[d] - g.coord(d, sb.hi[d]);
    if (lo_gap < eps || hi_gap < eps) {
      std::ostringstream os;
      os << "mollify: support within eps=" << eps << " of the grid faces along axis " << d;
      throw SupportError(os.str());
    }
  }
  Mollified m{VectorField3(g, A.real_valued), VectorField3(g, A.real_valued)};
  for (int d = 0; d < 3; ++d) {
    m.sharp.c[d] = convolve(g, A.c[d], eps);
    if (A.real_valued)
      for (auto& z : m.sharp.c[d]) z = cplx(z.real(), 0.0);
    for (std::size_t n = 0; n < g.size(); ++n) m.flat.c[d][n] = A.c[d][n] - m.sharp.c[d][n];
  }
  return m;
}

ScalarField mollify_interior(const ScalarField& f, double eps) {
  check_resolution(f.grid, eps);
  ScalarField out(f.grid);
  out.v = convolve(f.grid, f.v, eps);
  return out;
}

InteriorMollifier::InteriorMollifier(const ScalarField& f) : grid_(f.grid), spectrum_(f.v) {
  fft::transform({grid_.n(2), grid_.n(1), grid_.n(0)}, spectrum_.data(), -1);
}

ScalarField InteriorMollifier::at(double eps) const {
  check_resolution(grid_, eps);
  const auto kh = mollifier_spectrum(grid_, eps);
  ScalarField out(grid_);
  const double s = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] = spectrum_[n] * (*kh)[n] * s;
  fft::transform({grid_.n(2), grid_.n(1), grid_.n(0)}, out.v.data(), +1);
  return out;
}

// ---- amplitude -------------------------------------------------------------------

ScalarField build_amplitude(const ScalarField& g, const ScalarField& phi, const CVec3& zeta0,
                            std::optional<double> check_tol) {
  require_same_grid(g.grid, phi.grid, "build_amplitude");
  if (check_tol) {
    const VectorField3 grad = gradient(g);
    const ScalarField dg = contract(zeta0, grad);
    const IndexBox in = g.grid.interior(1);
    const double scale = l2_norm(grad, in);
    const double res = l2_norm(dg, in);
    if (res > *check_tol * scale && res > 1e-14 * l2_norm(g, in)) {
      std::ostringstream os;
      os << "build_amplitude: zeta0 . grad g relative residual " << res / scale << " exceeds " << *check_tol;
      throw AmplitudeError(os.str());
    }
  }
  ScalarField a(g.grid);
  for (std::size_t n = 0; n < a.v.size(); ++n) a.v[n] = g.v[n] * std::exp(phi.v[n]);
  return a;
}

ScalarField build_amplitude(const ScalarField& phi) { return exp(phi); }

// ---- conjugated operator -----------------------------------------------------------

ConjugatedTerms conjugated_expansion(const ConjugatedPoint& p, const CgoSpec& s, double k) {
  const double h = s.h;
  CVec3 z1;
  for (int d = 0; d < 3; ++d) z1[d] = s.zeta[d] - s.zeta0[d];
  const Vec3 A_flat = sub(p.A, p.A_sharp);
  ConjugatedTerms t;
  // -h^2 Lap a
  t.term[0] = -h * h * p.lap_a;
  // -2i(-i zeta0 + h A) . h grad a
  cplx acc = 0.0;
  for (int d = 0; d < 3; ++d) acc += (-kI * s.zeta0[d] + h * p.A[d]) * h * p.grad_a[d];
  t.term[1] = -2.0 * kI * acc;
  // -2 zeta1 . h grad a
  t.term[2] = -2.0 * h * dot(z1, p.grad_a);
  // h^2 A^2 a
  t.term[3] = h * h * dot(p.A, p.A) * p.a;
  // -2ih zeta0 . (A# + Ab) a
  t.term[4] = -2.0 * kI * h * (dot(s.zeta0, p.A_sharp) + dot(s.zeta0, A_flat)) * p.a;
  // -2ih zeta1 . A a
  t.term[5] = -2.0 * kI * h * dot(z1, p.A) * p.a;
  // -i h^2 (div A) a
  t.term[6] = -kI * h * h * p.div_A * p.a;
  // h^2 q a
  t.term[7] = h * h * p.q * p.a;
  // -h^2 k^2 a
  t.term[8] = -h * h * k * k * p.a;
  return t;
}

ConjugatedResidual conjugated_residual(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                       const VectorField3& A_sharp, const ScalarField& q, double k,
                                       const IndexBox& region) {
  require_same_grid(a.grid, A.grid, "conjugated_residual");
  require_same_grid(a.grid, A_sharp.grid, "conjugated_residual");
  require_same_grid(a.grid, q.grid, "conjugated_residual");
  const VectorField3 ga = gradient(a);
  const ScalarField la = laplacian(a);
  const ScalarField divA = divergence(A);
  ConjugatedResidual out{ScalarField(a.grid), 0.0};
  for (std::size_t n = 0; n < a.v.size(); ++n) {
    ConjugatedPoint p{a.v[n], ga.at(n), la.v[n], real(A.at(n)), real(A_sharp.at(n)), divA.v[n].real(), q.v[n]};
    out.field.v[n] = conjugated_expansion(p, spec, k).total();
  }
  const IndexBox in = a.grid.interior(1);
  IndexBox r = region;
  for (int d = 0; d < 3; ++d) {
    r.lo[d] = std::max(r.lo[d], in.lo[d]);
    r.hi[d] = std::min(r.hi[d], in.hi[d]);
  }
  out.sup = sup_norm(out.field, r);
  return out;
}

ConjugatedResidual conjugated_residual(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                       const VectorField3& A_sharp, const ScalarField& q, double k) {
  return conjugated_residual(a, spec, A, A_sharp, q, k, a.grid.all());
}

ScalarField assemble_cgo(const ScalarField& a, const ScalarField& r, const CgoSpec& spec) {
  require_same_grid(a.grid, r.grid, "assemble_cgo");
  ScalarField u(a.grid);
  const Grid3& g = a.grid;
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, k);
        u.v[n] = std::exp(dot(g.node(i, j, k), spec.zeta) / spec.h) * (a.v[n] + r.v[n]);
      }
  return u;
}

}  // namespace cgoh
