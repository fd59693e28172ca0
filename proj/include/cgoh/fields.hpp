#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "cgoh/common.hpp"

namespace cgoh {

struct Box3 {
  Vec3 lo{};
  Vec3 hi{};
  bool contains(const Vec3& x, double tol = 0.0) const {
    for (int d = 0; d < 3; ++d)
      if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
    return true;
  }
  Vec3 extent() const { return sub(hi, lo); }
};

// Inclusive index ranges.
struct IndexBox {
  std::array<int, 3> lo{};
  std::array<int, 3> hi{};
  std::size_t count() const {
    std::size_t c = 1;
    for (int d = 0; d < 3; ++d) c *= static_cast<std::size_t>(hi[d] - lo[d] + 1);
    return c;
  }
};

// Uniform node-centred grid. Node coordinates are lo + i * spacing, so they are
// reproducible bit-exactly from (box, n).
class Grid3 {
 public:
  Grid3() = default;
  Grid3(const Box3& box, const std::array<int, 3>& n);
  Grid3(const Box3& box, int n) : Grid3(box, {n, n, n}) {}

  const Box3& box() const { return box_; }
  const std::array<int, 3>& dims() const { return n_; }
  int n(int axis) const { return n_[axis]; }
  const Vec3& spacing() const { return d_; }
  double h(int axis) const { return d_[axis]; }
  double cell_volume() const { return d_[0] * d_[1] * d_[2]; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]) *
           static_cast<std::size_t>(n_[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(k));
  }
  std::size_t stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? static_cast<std::size_t>(n_[0])
                                     : static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
  }
  double coord(int axis, int i) const { return box_.lo[axis] + i * d_[axis]; }
  Vec3 node(int i, int j, int k) const { return {coord(0, i), coord(1, j), coord(2, k)}; }
  IndexBox all() const { return {{0, 0, 0}, {n_[0] - 1, n_[1] - 1, n_[2] - 1}}; }
  IndexBox interior(int margin = 1) const {
    return {{margin, margin, margin}, {n_[0] - 1 - margin, n_[1] - 1 - margin, n_[2] - 1 - margin}};
  }
  // Nodes lying inside a closed coordinate box (tolerant to rounding).
  IndexBox nodes_in(const Box3& region) const;
  Grid3 subgrid(const IndexBox& ib) const;
  bool same_as(const Grid3& other) const;

  // Node rows are mirror images through x3 = 0 and one row lies on the plane.
  bool symmetric_about_plane() const;
  int plane_row() const;  // requires symmetric_about_plane()
  int mirror_row(int k) const { return n_[2] - 1 - k; }

 private:
  Box3 box_{};
  std::array<int, 3> n_{};
  Vec3 d_{};
};

// Trapezoidal weight of node i along an axis with n nodes.
inline double trap_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

struct ScalarField {
  Grid3 grid;
  std::vector<cplx> v;

  ScalarField() = default;
  explicit ScalarField(const Grid3& g, cplx fill = 0.0) : grid(g), v(g.size(), fill) {}
  cplx& operator()(int i, int j, int k) { return v[grid.index(i, j, k)]; }
  const cplx& operator()(int i, int j, int k) const { return v[grid.index(i, j, k)]; }
  cplx& operator[](std::size_t n) { return v[n]; }
  const cplx& operator[](std::size_t n) const { return v[n]; }
};

struct VectorField3 {
  Grid3 grid;
  std::array<std::vector<cplx>, 3> c;
  bool real_valued = true;

  VectorField3() = default;
  explicit VectorField3(const Grid3& g, bool real = true) : grid(g), real_valued(real) {
    for (auto& comp : c) comp.assign(g.size(), 0.0);
  }
  CVec3 at(std::size_t n) const { return {c[0][n], c[1][n], c[2][n]}; }
  void set(std::size_t n, const CVec3& val) {
    c[0][n] = val[0];
    c[1][n] = val[1];
    c[2][n] = val[2];
  }
  ScalarField component(int axis) const;
  void set_component(int axis, const ScalarField& f);
};

// ---- sampling -------------------------------------------------------------

[[noreturn]] void throw_nonfinite(const Grid3& g, int i, int j, int k);

template <class F>
ScalarField sample(const Grid3& g, F&& fn) {
  ScalarField out(g);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const cplx val = cplx(fn(g.node(i, j, k)));
        if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) throw_nonfinite(g, i, j, k);
        out(i, j, k) = val;
      }
  return out;
}

template <class F>
VectorField3 sample_vector(const Grid3& g, F&& fn) {
  using R = std::decay_t<decltype(fn(Vec3{}))>;
  VectorField3 out(g, std::is_same_v<R, Vec3>);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const R val = fn(g.node(i, j, k));
        const std::size_t n = g.index(i, j, k);
        for (int d = 0; d < 3; ++d) {
          const cplx cv = cplx(val[d]);
          if (!std::isfinite(cv.real()) || !std::isfinite(cv.imag())) throw_nonfinite(g, i, j, k);
          out.c[d][n] = cv;
        }
      }
  return out;
}

// ---- arithmetic -----------------------------------------------------------

void require_same_grid(const Grid3& a, const Grid3& b, const char* what);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cplx s, const ScalarField& a);
VectorField3 operator+(const VectorField3& a, const VectorField3& b);
VectorField3 operator-(const VectorField3& a, const VectorField3& b);
VectorField3 operator*(cplx s, const VectorField3& a);
ScalarField conj(const ScalarField& a);
ScalarField exp(const ScalarField& a);
// Bilinear contraction z . V at every node.
ScalarField contract(const CVec3& z, const VectorField3& V);
ScalarField dot(const VectorField3& a, const VectorField3& b);
ScalarField restrict_to(const ScalarField& f, const IndexBox& ib);
VectorField3 restrict_to(const VectorField3& f, const IndexBox& ib);

// ---- discrete calculus (central interior, second-order one-sided at faces) -

ScalarField partial(const ScalarField& f, int axis);
ScalarField second_partial(const ScalarField& f, int axis);
VectorField3 gradient(const ScalarField& f);
ScalarField divergence(const VectorField3& V);
VectorField3 curl(const VectorField3& V);
ScalarField laplacian(const ScalarField& f);

// ---- norms and quadrature -------------------------------------------------

struct Norms {
  double l2 = 0.0;
  double sup = 0.0;
  double h1_scl = 0.0;  // ||f||_{L2} + ||h grad f||_{L2}
};

Norms norms(const ScalarField& f, double h);
Norms norms(const ScalarField& f, double h, const IndexBox& region);
double l2_norm(const ScalarField& f);
double l2_norm(const ScalarField& f, const IndexBox& region);
double l2_norm(const VectorField3& V);
double l2_norm(const VectorField3& V, const IndexBox& region);
double sup_norm(const ScalarField& f);
double sup_norm(const ScalarField& f, const IndexBox& region);
double sup_norm(const VectorField3& V);
cplx integrate(const ScalarField& f);
cplx integrate(const ScalarField& f, const IndexBox& region);

// Trapezoidal quadrature of f(x) exp(i x . xi). Emits a support-leak warning
// when the field is not negligible on the grid boundary.
cplx fourier_sample(const ScalarField& f, const Vec3& xi);
CVec3 fourier_sample(const VectorField3& V, const Vec3& xi);
// Largest boundary magnitude relative to the interior maximum.
double boundary_leak(const ScalarField& f);

// Samples of the transform on the FFT lattice xi_m = 2 pi m / (n h), with m in
// FFT order. Agrees with fourier_sample on that lattice up to boundary weights.
struct LatticeSpectrum {
  std::array<int, 3> n{};
  Vec3 dxi{};
  std::vector<cplx> values;
  int signed_index(int axis, int m) const { return m <= n[axis] / 2 - (n[axis] % 2 == 0 ? 1 : 0) ? m : m - n[axis]; }
  Vec3 xi(int m0, int m1, int m2) const {
    return {signed_index(0, m0) * dxi[0], signed_index(1, m1) * dxi[1], signed_index(2, m2) * dxi[2]};
  }
  cplx at(int m0, int m1, int m2) const {
    return values[static_cast<std::size_t>(m0) + static_cast<std::size_t>(n[0]) * (m1 + static_cast<std::size_t>(n[1]) * m2)];
  }
};
LatticeSpectrum fft3(const ScalarField& f);

// ---- interpolation --------------------------------------------------------

enum class Interp { Trilinear, Tricubic };
// Value at an arbitrary point; zero outside the grid box.
cplx interpolate(const ScalarField& f, const Vec3& x, Interp kind = Interp::Trilinear);

// Bounding index box of nodes with |f| > threshold * max|f| (empty -> all()).
IndexBox support_box(const ScalarField& f, double threshold = 1e-12);
IndexBox support_box(const VectorField3& V, double threshold = 1e-12);
IndexBox grow(const IndexBox& ib, int layers, const Grid3& g);
IndexBox hull(const IndexBox& a, const IndexBox& b);

}  // namespace cgoh
