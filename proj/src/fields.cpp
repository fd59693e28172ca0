#include "cgoh/fields.hpp"

#include <algorithm>
#include <sstream>

#include "cgoh/diagnostics.hpp"
#include "cgoh/fft.hpp"

namespace cgoh {

Grid3::Grid3(const Box3& box, const std::array<int, 3>& n) : box_(box), n_(n) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 2) throw GridError("grid: axis " + std::to_string(d) + " needs at least 2 nodes");
    if (!(box.hi[d] > box.lo[d]) || !std::isfinite(box.lo[d]) || !std::isfinite(box.hi[d]))
      throw GridError("grid: empty or non-finite box along axis " + std::to_string(d));
    d_[d] = (box.hi[d] - box.lo[d]) / (n[d] - 1);
  }
}

IndexBox Grid3::nodes_in(const Box3& region) const {
  IndexBox ib;
  for (int d = 0; d < 3; ++d) {
    const double tol = 1e-9 * d_[d];
    int lo = static_cast<int>(std::ceil((region.lo[d] - box_.lo[d]) / d_[d] - 1e-9));
    int hi = static_cast<int>(std::floor((region.hi[d] - box_.lo[d]) / d_[d] + 1e-9));
    lo = std::max(lo, 0);
    hi = std::min(hi, n_[d] - 1);
    if (coord(d, lo) < region.lo[d] - tol) ++lo;
    if (hi < lo) throw GridError("grid: region contains no nodes along axis " + std::to_string(d));
    ib.lo[d] = lo;
    ib.hi[d] = hi;
  }
  return ib;
}

Grid3 Grid3::subgrid(const IndexBox& ib) const {
  Box3 b;
  std::array<int, 3> n{};
  for (int d = 0; d < 3; ++d) {
    if (ib.lo[d] < 0 || ib.hi[d] >= n_[d] || ib.hi[d] <= ib.lo[d])
      throw GridError("grid: invalid sub-box along axis " + std::to_string(d));
    b.lo[d] = coord(d, ib.lo[d]);
    b.hi[d] = coord(d, ib.hi[d]);
    n[d] = ib.hi[d] - ib.lo[d] + 1;
  }
  Grid3 g;
  g.box_ = b;
  g.n_ = n;
  g.d_ = d_;  // keep spacing bit-identical to the parent
  return g;
}

bool Grid3::same_as(const Grid3& o) const {
  for (int d = 0; d < 3; ++d) {
    if (n_[d] != o.n_[d]) return false;
    const double tol = 1e-12 * std::max(1.0, std::abs(box_.hi[d] - box_.lo[d]));
    if (std::abs(box_.lo[d] - o.box_.lo[d]) > tol || std::abs(d_[d] - o.d_[d]) > 1e-12 * d_[d]) return false;
  }
  return true;
}

bool Grid3::symmetric_about_plane() const {
  if (n_[2] % 2 == 0) return false;
  const double tol = 1e-12 * std::max(1.0, box_.hi[2] - box_.lo[2]);
  return std::abs(box_.lo[2] + box_.hi[2]) <= tol;
}

int Grid3::plane_row() const {
  if (!symmetric_about_plane()) throw GridError("grid: not node-symmetric about x3 = 0");
  return (n_[2] - 1) / 2;
}

ScalarField VectorField3::component(int axis) const {
  ScalarField f(grid);
  f.v = c[axis];
  return f;
}

void VectorField3::set_component(int axis, const ScalarField& f) {
  require_same_grid(grid, f.grid, "set_component");
  c[axis] = f.v;
}

void throw_nonfinite(const Grid3& g, int i, int j, int k) {
  const Vec3 x = g.node(i, j, k);
  std::ostringstream os;
  os << "sample: non-finite value at node (" << i << "," << j << "," << k << ") x=(" << x[0] << "," << x[1]
     << "," << x[2] << ")";
  throw EvaluationError(os.str());
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* what) {
  if (!a.same_as(b)) throw GridError(std::string(what) + ": grid mismatch");
}

namespace {

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op, const char* what) {
  require_same_grid(a.grid, b.grid, what);
  ScalarField out(a.grid);
  for (std::size_t n = 0; n < a.v.size(); ++n) out.v[n] = op(a.v[n], b.v[n]);
  return out;
}

template <class Op>
VectorField3 zipv(const VectorField3& a, const VectorField3& b, Op op, const char* what) {
  require_same_grid(a.grid, b.grid, what);
  VectorField3 out(a.grid, a.real_valued && b.real_valued);
  for (int d = 0; d < 3; ++d)
    for (std::size_t n = 0; n < a.c[d].size(); ++n) out.c[d][n] = op(a.c[d][n], b.c[d][n]);
  return out;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](cplx x, cplx y) { return x + y; }, "add");
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](cplx x, cplx y) { return x - y; }, "subtract");
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](cplx x, cplx y) { return x * y; }, "multiply");
}
ScalarField operator*(cplx s, const ScalarField& a) {
  ScalarField out(a.grid);
  for (std::size_t n = 0; n < a.v.size(); ++n) out.v[n] = s * a.v[n];
  return out;
}
VectorField3 operator+(const VectorField3& a, const VectorField3& b) {
  return zipv(a, b, [](cplx x, cplx y) { return x + y; }, "add");
}
VectorField3 operator-(const VectorField3& a, const VectorField3& b) {
  return zipv(a, b, [](cplx x, cplx y) { return x - y; }, "subtract");
}
VectorField3 operator*(cplx s, const VectorField3& a) {
  VectorField3 out(a.grid, a.real_valued && s.imag() == 0.0);
  for (int d = 0; d < 3; ++d)
    for (std::size_t n = 0; n < a.c[d].size(); ++n) out.c[d][n] = s * a.c[d][n];
  return out;
}
ScalarField conj(const ScalarField& a) {
  ScalarField out(a.grid);
  for (std::size_t n = 0; n < a.v.size(); ++n) out.v[n] = std::conj(a.v[n]);
  return out;
}
ScalarField exp(const ScalarField& a) {
  ScalarField out(a.grid);
  for (std::size_t n = 0; n < a.v.size(); ++n) out.v[n] = std::exp(a.v[n]);
  return out;
}
ScalarField contract(const CVec3& z, const VectorField3& V) {
  ScalarField out(V.grid);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] = z[0] * V.c[0][n] + z[1] * V.c[1][n] + z[2] * V.c[2][n];
  return out;
}
ScalarField dot(const VectorField3& a, const VectorField3& b) {
  require_same_grid(a.grid, b.grid, "dot");
  ScalarField out(a.grid);
  for (std::size_t n = 0; n < out.v.size(); ++n)
    out.v[n] = a.c[0][n] * b.c[0][n] + a.c[1][n] * b.c[1][n] + a.c[2][n] * b.c[2][n];
  return out;
}

ScalarField restrict_to(const ScalarField& f, const IndexBox& ib) {
  const Grid3 sub = f.grid.subgrid(ib);
  ScalarField out(sub);
  for (int k = ib.lo[2]; k <= ib.hi[2]; ++k)
    for (int j = ib.lo[1]; j <= ib.hi[1]; ++j)
      for (int i = ib.lo[0]; i <= ib.hi[0]; ++i)
        out(i - ib.lo[0], j - ib.lo[1], k - ib.lo[2]) = f(i, j, k);
  return out;
}

VectorField3 restrict_to(const VectorField3& V, const IndexBox& ib) {
  const Grid3 sub = V.grid.subgrid(ib);
  VectorField3 out(sub, V.real_valued);
  for (int d = 0; d < 3; ++d) out.c[d] = restrict_to(V.component(d), ib).v;
  return out;
}

// ---- discrete calculus ------------------------------------------------------

ScalarField partial(const ScalarField& f, int axis) {
  const Grid3& g = f.grid;
  const int n = g.n(axis);
  if (n < 3) throw GridError("partial: need at least 3 nodes along the axis");
  const std::size_t s = g.stride(axis);
  const double inv2h = 1.0 / (2.0 * g.h(axis));
  ScalarField out(g);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::array<int, 3> idx{i, j, k};
        const int p = idx[axis];
        const std::size_t c = g.index(i, j, k);
        cplx d;
        if (p == 0)
          d = (-3.0 * f.v[c] + 4.0 * f.v[c + s] - f.v[c + 2 * s]) * inv2h;
        else if (p == n - 1)
          d = (3.0 * f.v[c] - 4.0 * f.v[c - s] + f.v[c - 2 * s]) * inv2h;
        else
          d = (f.v[c + s] - f.v[c - s]) * inv2h;
        out.v[c] = d;
      }
  return out;
}

ScalarField second_partial(const ScalarField& f, int axis) {
  const Grid3& g = f.grid;
  const int n = g.n(axis);
  if (n < 4) throw GridError("second_partial: need at least 4 nodes along the axis");
  const std::size_t s = g.stride(axis);
  const double inv = 1.0 / (g.h(axis) * g.h(axis));
  ScalarField out(g);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::array<int, 3> idx{i, j, k};
        const int p = idx[axis];
        const std::size_t c = g.index(i, j, k);
        cplx d;
        if (p == 0)
          d = (2.0 * f.v[c] - 5.0 * f.v[c + s] + 4.0 * f.v[c + 2 * s] - f.v[c + 3 * s]) * inv;
        else if (p == n - 1)
          d = (2.0 * f.v[c] - 5.0 * f.v[c - s] + 4.0 * f.v[c - 2 * s] - f.v[c - 3 * s]) * inv;
        else
          d = (f.v[c + s] - 2.0 * f.v[c] + f.v[c - s]) * inv;
        out.v[c] = d;
      }
  return out;
}

VectorField3 gradient(const ScalarField& f) {
  VectorField3 out(f.grid, false);
  for (int d = 0; d < 3; ++d) out.c[d] = partial(f, d).v;
  return out;
}

ScalarField divergence(const VectorField3& V) {
  ScalarField out(V.grid);
  for (int d = 0; d < 3; ++d) {
    const ScalarField p = partial(V.component(d), d);
    for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] += p.v[n];
  }
  return out;
}

VectorField3 curl(const VectorField3& V) {
  VectorField3 out(V.grid, V.real_valued);
  const ScalarField Vx = V.component(0), Vy = V.component(1), Vz = V.component(2);
  const ScalarField dyVz = partial(Vz, 1), dzVy = partial(Vy, 2);
  const ScalarField dzVx = partial(Vx, 2), dxVz = partial(Vz, 0);
  const ScalarField dxVy = partial(Vy, 0), dyVx = partial(Vx, 1);
  for (std::size_t n = 0; n < out.c[0].size(); ++n) {
    out.c[0][n] = dyVz.v[n] - dzVy.v[n];
    out.c[1][n] = dzVx.v[n] - dxVz.v[n];
    out.c[2][n] = dxVy.v[n] - dyVx.v[n];
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid);
  for (int d = 0; d < 3; ++d) {
    const ScalarField p = second_partial(f, d);
    for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] += p.v[n];
  }
  return out;
}

// ---- norms and quadrature -----------------------------------------------------

namespace {

template <class F>
void for_each_weighted(const Grid3& g, const IndexBox& r, F&& fn) {
  for (int k = r.lo[2]; k <= r.hi[2]; ++k) {
    const double wk = trap_weight(k - r.lo[2], r.hi[2] - r.lo[2] + 1);
    for (int j = r.lo[1]; j <= r.hi[1]; ++j) {
      const double wj = wk * trap_weight(j - r.lo[1], r.hi[1] - r.lo[1] + 1);
      for (int i = r.lo[0]; i <= r.hi[0]; ++i)
        fn(g.index(i, j, k), wj * trap_weight(i - r.lo[0], r.hi[0] - r.lo[0] + 1));
    }
  }
}

}  // namespace

double l2_norm(const ScalarField& f, const IndexBox& region) {
  double acc = 0.0;
  for_each_weighted(f.grid, region, [&](std::size_t n, double w) { acc += w * std::norm(f.v[n]); });
  return std::sqrt(acc * f.grid.cell_volume());
}
double l2_norm(const ScalarField& f) { return l2_norm(f, f.grid.all()); }

double l2_norm(const VectorField3& V, const IndexBox& region) {
  double acc = 0.0;
  for_each_weighted(V.grid, region, [&](std::size_t n, double w) {
    acc += w * (std::norm(V.c[0][n]) + std::norm(V.c[1][n]) + std::norm(V.c[2][n]));
  });
  return std::sqrt(acc * V.grid.cell_volume());
}
double l2_norm(const VectorField3& V) { return l2_norm(V, V.grid.all()); }

double sup_norm(const ScalarField& f, const IndexBox& r) {
  double m = 0.0;
  for (int k = r.lo[2]; k <= r.hi[2]; ++k)
    for (int j = r.lo[1]; j <= r.hi[1]; ++j)
      for (int i = r.lo[0]; i <= r.hi[0]; ++i) m = std::max(m, std::abs(f(i, j, k)));
  return m;
}
double sup_norm(const ScalarField& f) { return sup_norm(f, f.grid.all()); }
double sup_norm(const VectorField3& V) {
  double m = 0.0;
  for (std::size_t n = 0; n < V.c[0].size(); ++n) m = std::max(m, norm(V.at(n)));
  return m;
}

Norms norms(const ScalarField& f, double h, const IndexBox& region) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("norms: semiclassical parameter must be positive");
  Norms out;
  out.l2 = l2_norm(f, region);
  out.sup = sup_norm(f, region);
  out.h1_scl = out.l2 + h * l2_norm(gradient(f), region);
  return out;
}
Norms norms(const ScalarField& f, double h) { return norms(f, h, f.grid.all()); }

cplx integrate(const ScalarField& f, const IndexBox& region) {
  cplx acc = 0.0;
  for_each_weighted(f.grid, region, [&](std::size_t n, double w) { acc += w * f.v[n]; });
  return acc * f.grid.cell_volume();
}
cplx integrate(const ScalarField& f) { return integrate(f, f.grid.all()); }

double boundary_leak(const ScalarField& f) {
  const Grid3& g = f.grid;
  double inner = 0.0, edge = 0.0;
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const double a = std::abs(f(i, j, k));
        inner = std::max(inner, a);
        if (i == 0 || j == 0 || k == 0 || i == g.n(0) - 1 || j == g.n(1) - 1 || k == g.n(2) - 1)
          edge = std::max(edge, a);
      }
  return inner > 0.0 ? edge / inner : 0.0;
}

namespace {

std::vector<cplx> axis_phase(const Grid3& g, int axis, double xi) {
  std::vector<cplx> p(g.n(axis));
  for (int i = 0; i < g.n(axis); ++i) p[i] = std::polar(trap_weight(i, g.n(axis)), g.coord(axis, i) * xi);
  return p;
}

cplx fourier_raw(const Grid3& g, const std::vector<cplx>& v, const Vec3& xi) {
  const auto p0 = axis_phase(g, 0, xi[0]), p1 = axis_phase(g, 1, xi[1]), p2 = axis_phase(g, 2, xi[2]);
  cplx acc = 0.0;
  for (int k = 0; k < g.n(2); ++k) {
    cplx row_k = 0.0;
    for (int j = 0; j < g.n(1); ++j) {
      cplx row = 0.0;
      const std::size_t base = g.index(0, j, k);
      for (int i = 0; i < g.n(0); ++i) row += p0[i] * v[base + i];
      row_k += p1[j] * row;
    }
    acc += p2[k] * row_k;
  }
  return acc * g.cell_volume();
}

void check_leak(const ScalarField& f, const char* what) {
  const double leak = boundary_leak(f);
  if (leak > 1e-8) {
    std::ostringstream os;
    os << what << ": field not negligible on grid boundary (relative " << leak << ")";
    diag::warn("support-leak", os.str());
  }
}

}  // namespace

cplx fourier_sample(const ScalarField& f, const Vec3& xi) {
  check_leak(f, "fourier_sample");
  return fourier_raw(f.grid, f.v, xi);
}

CVec3 fourier_sample(const VectorField3& V, const Vec3& xi) {
  CVec3 out;
  for (int d = 0; d < 3; ++d) {
    check_leak(V.component(d), "fourier_sample");
    out[d] = fourier_raw(V.grid, V.c[d], xi);
  }
  return out;
}

LatticeSpectrum fft3(const ScalarField& f) {
  const Grid3& g = f.grid;
  LatticeSpectrum s;
  s.n = g.dims();
  for (int d = 0; d < 3; ++d) s.dxi[d] = 2.0 * kPi / (g.n(d) * g.h(d));
  s.values = f.v;
  // Storage is x-fastest, so the row-major dims are (n2, n1, n0).
  fft::transform({g.n(2), g.n(1), g.n(0)}, s.values.data(), +1);
  const double vol = g.cell_volume();
  for (int m2 = 0; m2 < s.n[2]; ++m2)
    for (int m1 = 0; m1 < s.n[1]; ++m1)
      for (int m0 = 0; m0 < s.n[0]; ++m0) {
        const Vec3 xi = s.xi(m0, m1, m2);
        const double shift = dot(g.box().lo, xi);
        auto& val = s.values[static_cast<std::size_t>(m0) + static_cast<std::size_t>(s.n[0]) * (m1 + static_cast<std::size_t>(s.n[1]) * m2)];
        val *= std::polar(vol, shift);
      }
  return s;
}

// ---- interpolation --------------------------------------------------------

namespace {

// Lagrange weights for 4 nodes at offsets start..start+3 evaluated at t
// (in node units relative to node `start`).
void cubic_weights(double t, double w[4]) {
  const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  w[0] = -t1 * t2 * t3 / 6.0;
  w[1] = t0 * t2 * t3 / 2.0;
  w[2] = -t0 * t1 * t3 / 2.0;
  w[3] = t0 * t1 * t2 / 6.0;
}

}  // namespace

cplx interpolate(const ScalarField& f, const Vec3& x, Interp kind) {
  const Grid3& g = f.grid;
  double u[3];
  for (int d = 0; d < 3; ++d) {
    u[d] = (x[d] - g.box().lo[d]) / g.h(d);
    if (u[d] < -1e-9 || u[d] > g.n(d) - 1 + 1e-9) return 0.0;
    u[d] = std::clamp(u[d], 0.0, static_cast<double>(g.n(d) - 1));
  }
  if (kind == Interp::Tricubic && g.n(0) >= 4 && g.n(1) >= 4 && g.n(2) >= 4) {
    int s[3];
    double w[3][4];
    for (int d = 0; d < 3; ++d) {
      s[d] = std::clamp(static_cast<int>(std::floor(u[d])) - 1, 0, g.n(d) - 4);
      cubic_weights(u[d] - s[d], w[d]);
    }
    cplx acc = 0.0;
    for (int c = 0; c < 4; ++c) {
      cplx plane = 0.0;
      for (int b = 0; b < 4; ++b) {
        const std::size_t base = g.index(s[0], s[1] + b, s[2] + c);
        const cplx line = w[0][0] * f.v[base] + w[0][1] * f.v[base + 1] + w[0][2] * f.v[base + 2] + w[0][3] * f.v[base + 3];
        plane += w[1][b] * line;
      }
      acc += w[2][c] * plane;
    }
    return acc;
  }
  int i0[3];
  double t[3];
  for (int d = 0; d < 3; ++d) {
    i0[d] = std::min(static_cast<int>(std::floor(u[d])), g.n(d) - 2);
    t[d] = u[d] - i0[d];
  }
  const std::size_t b = g.index(i0[0], i0[1], i0[2]);
  const std::size_t sy = g.stride(1), sz = g.stride(2);
  const cplx c00 = f.v[b] * (1 - t[0]) + f.v[b + 1] * t[0];
  const cplx c10 = f.v[b + sy] * (1 - t[0]) + f.v[b + sy + 1] * t[0];
  const cplx c01 = f.v[b + sz] * (1 - t[0]) + f.v[b + sz + 1] * t[0];
  const cplx c11 = f.v[b + sy + sz] * (1 - t[0]) + f.v[b + sy + sz + 1] * t[0];
  const cplx c0 = c00 * (1 - t[1]) + c10 * t[1];
  const cplx c1 = c01 * (1 - t[1]) + c11 * t[1];
  return c0 * (1 - t[2]) + c1 * t[2];
}

IndexBox support_box(const ScalarField& f, double threshold) {
  const Grid3& g = f.grid;
  double mx = 0.0;
  for (const auto& z : f.v) mx = std::max(mx, std::abs(z));
  IndexBox ib{{g.n(0), g.n(1), g.n(2)}, {-1, -1, -1}};
  if (mx == 0.0) return g.all();
  const double cut = threshold * mx;
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i)
        if (std::abs(f(i, j, k)) > cut) {
          const std::array<int, 3> p{i, j, k};
          for (int d = 0; d < 3; ++d) {
            ib.lo[d] = std::min(ib.lo[d], p[d]);
            ib.hi[d] = std::max(ib.hi[d], p[d]);
          }
        }
  return ib;
}

IndexBox support_box(const VectorField3& V, double threshold) {
  ScalarField mag(V.grid);
  for (std::size_t n = 0; n < mag.v.size(); ++n) mag.v[n] = norm(V.at(n));
  return support_box(mag, threshold);
}

IndexBox grow(const IndexBox& ib, int layers, const Grid3& g) {
  IndexBox out = ib;
  for (int d = 0; d < 3; ++d) {
    out.lo[d] = std::max(0, ib.lo[d] - layers);
    out.hi[d] = std::min(g.n(d) - 1, ib.hi[d] + layers);
  }
  return out;
}

IndexBox hull(const IndexBox& a, const IndexBox& b) {
  IndexBox out;
  for (int d = 0; d < 3; ++d) {
    out.lo[d] = std::min(a.lo[d], b.lo[d]);
    out.hi[d] = std::max(a.hi[d], b.hi[d]);
  }
  return out;
}

}  // namespace cgoh
