#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cgoh/common.hpp"

namespace cgoh {

// Uniform node-centred grid on a rectangle of the complex plane (x + i y).
struct Grid2 {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  std::array<int, 2> n{};
  std::array<double, 2> d{};

  Grid2() = default;
  Grid2(std::array<double, 2> lo_, std::array<double, 2> hi_, std::array<int, 2> n_);
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * j; }
  cplx node(int i, int j) const { return {lo[0] + i * d[0], lo[1] + j * d[1]}; }
};

struct PlaneField {
  Grid2 grid;
  std::vector<cplx> v;

  PlaneField() = default;
  explicit PlaneField(const Grid2& g, cplx fill = 0.0) : grid(g), v(g.size(), fill) {}
  cplx& operator()(int i, int j) { return v[grid.index(i, j)]; }
  const cplx& operator()(int i, int j) const { return v[grid.index(i, j)]; }
};

template <class F>
PlaneField sample_plane(const Grid2& g, F&& fn) {
  PlaneField out(g);
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) out(i, j) = cplx(fn(g.node(i, j)));
  return out;
}

double l2_norm(const PlaneField& f);

// dbar = (d/dx + i d/dy) / 2, central in the interior, second-order one-sided
// on the edges.
PlaneField dbar_apply(const PlaneField& g);

// Average of 1/(pi s) over the cell [cx -+ dx/2] x [cy -+ dy/2].
cplx cauchy_kernel_cell_average(double cx, double cy, double dx, double dy);

// Reusable convolution with the cell-averaged Cauchy kernel for a fixed grid
// shape. Kernel spectra are shared between instances with the same shape.
class CauchyPlan {
 public:
  CauchyPlan(int n0, int n1, double dx, double dy);
  // out[p] = sum_q in[q] |cell| avgK(z_p - z_q); in and out hold n0*n1 values
  // (x fastest) and may alias.
  void apply(const cplx* in, cplx* out);
  int n0() const { return n0_; }
  int n1() const { return n1_; }

 private:
  int n0_, n1_, m0_, m1_;
  std::shared_ptr<const std::vector<cplx>> kernel_hat_;
  std::vector<cplx> work_;
};

// (1/pi) * integral of f(w) / (z - w) over the plane. The data must vanish
// on the grid boundary.
PlaneField cauchy_transform(const PlaneField& f);

// Closed contours are sampled at uniform parameter values (no repeated end
// point); open contours are polylines.
struct Contour {
  std::vector<cplx> z;
  bool closed = true;

  void validate() const;
  double mesh() const;  // largest gap between consecutive samples
};

Contour circle(cplx centre, double radius, int samples);

// Weights w with sum_j w_j f(z_j) ~ integral of f dz. Closed contours use the
// spectral derivative of the parametrisation.
std::vector<cplx> contour_weights(const Contour& c);
cplx contour_integral(const Contour& c, const std::vector<cplx>& values);

// (1/(2 pi i)) closed integral of g(s) / (s - z) ds for z inside.
cplx plemelj_interior(const Contour& c, const std::vector<cplx>& boundary_values, cplx z);

// Winding number about the origin of a closed sampled path.
int winding_number(const Contour& path);

// log F on a connected set of nodes (mask), continued from the base node where
// it takes the value w0. Fails if F vanishes or the phase is under-resolved.
PlaneField holomorphic_log(const PlaneField& F, const std::vector<char>& mask, int base_i, int base_j,
                           cplx w0);

}  // namespace cgoh
