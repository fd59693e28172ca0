#include <algorithm>
#include <sstream>

#include "cgoh/cgo.hpp"
#include "cgoh/dbar.hpp"

namespace cgoh {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::array<Range, 3> frame_ranges(const Frame& f, const Box3& b) {
  std::array<Range, 3> r;
  for (int c = 0; c < 8; ++c) {
    const Vec3 x{(c & 1) ? b.hi[0] : b.lo[0], (c & 2) ? b.hi[1] : b.lo[1], (c & 4) ? b.hi[2] : b.lo[2]};
    const Vec3 y = f.to_frame(x);
    for (int d = 0; d < 3; ++d) r[d].add(y[d]);
  }
  return r;
}

}  // namespace

ScalarField solve_transport_phase_on(const VectorField3& A, const CVec3& zeta0, const Frame& frame,
                                     const Grid3& target, const SliceOptions& opts) {
  frame.validate();
  const CVec3 z = frame.zeta0();
  for (int d = 0; d < 3; ++d)
    if (std::abs(z[d] - zeta0[d]) > 1e-10) throw ArgumentError("transport: zeta0 does not match the frame");
  if (!(opts.spacing_factor > 0.0)) throw ArgumentError("transport: spacing factor must be positive");

  const Grid3& G = A.grid;
  // Source -i zeta0 . A / 2 on the storage grid.
  ScalarField src = contract(zeta0, A);
  for (auto& v : src.v) v *= -0.5 * kI;
  ScalarField out(target);
  double smax = 0.0;
  for (const auto& v : src.v) smax = std::max(smax, std::abs(v));
  if (smax == 0.0) return out;

  const IndexBox sb = grow(support_box(src, 0.0), 1, G);
  const Box3 data_box{G.node(sb.lo[0], sb.lo[1], sb.lo[2]), G.node(sb.hi[0], sb.hi[1], sb.hi[2])};
  const double delta = opts.spacing_factor * std::min({G.h(0), G.h(1), G.h(2)});
  const auto dr = frame_ranges(frame, data_box);
  const auto tr = frame_ranges(frame, target.box());

  // Frame grid nodes sit on integer multiples of delta.
  Box3 fb;
  std::array<int, 3> fn{};
  for (int d = 0; d < 3; ++d) {
    double lo, hi;
    if (d < 2) {
      lo = std::min(dr[d].lo, tr[d].lo);
      hi = std::max(dr[d].hi, tr[d].hi);
    } else {
      lo = dr[d].lo;
      hi = dr[d].hi;
    }
    const long ilo = static_cast<long>(std::floor(lo / delta)) - 2;
    const long ihi = static_cast<long>(std::ceil(hi / delta)) + 2;
    fb.lo[d] = ilo * delta;
    fb.hi[d] = ihi * delta;
    fn[d] = static_cast<int>(ihi - ilo + 1);
  }
  const Grid3 FG(fb, fn);

  ScalarField fdata(FG);
  for (int k = 0; k < FG.n(2); ++k)
    for (int j = 0; j < FG.n(1); ++j)
      for (int i = 0; i < FG.n(0); ++i) {
        const Vec3 x = frame.from_frame(FG.node(i, j, k));
        if (!data_box.contains(x, 1e-12)) continue;
        fdata(i, j, k) = interpolate(src, x, opts.interp);
      }

  ScalarField phi(FG);
  CauchyPlan plan(FG.n(0), FG.n(1), FG.h(0), FG.h(1));
  const std::size_t slice = static_cast<std::size_t>(FG.n(0)) * FG.n(1);
  for (int k = 0; k < FG.n(2); ++k) {
    const cplx* in = fdata.v.data() + slice * k;
    bool any = false;
    for (std::size_t n = 0; n < slice && !any; ++n) any = in[n] != 0.0;
    if (any) plan.apply(in, phi.v.data() + slice * k);
  }

  for (int k = 0; k < target.n(2); ++k)
    for (int j = 0; j < target.n(1); ++j)
      for (int i = 0; i < target.n(0); ++i)
        out(i, j, k) = interpolate(phi, frame.to_frame(target.node(i, j, k)), opts.interp);
  return out;
}

ScalarField solve_transport_phase(const VectorField3& A, const CVec3& zeta0, const Frame& frame,
                                  const SliceOptions& opts) {
  return solve_transport_phase_on(A, zeta0, frame, A.grid, opts);
}

ScalarField phase_limit(const VectorField3& A, const CVec3& zeta0, const Frame& frame, const SliceOptions& opts) {
  return solve_transport_phase_on(A, zeta0, frame, A.grid, opts);
}

double transport_residual(const ScalarField& phi, const VectorField3& A, const CVec3& zeta0) {
  require_same_grid(phi.grid, A.grid, "transport_residual");
  const Grid3& g = phi.grid;
  const ScalarField za = contract(zeta0, A);
  // Fourth-order central differences, so that the check resolves the solve
  // error rather than its own truncation error.
  const IndexBox in = g.interior(2);
  double num = 0.0, den = 0.0;
  for (int k = in.lo[2]; k <= in.hi[2]; ++k)
    for (int j = in.lo[1]; j <= in.hi[1]; ++j)
      for (int i = in.lo[0]; i <= in.hi[0]; ++i) {
        const std::size_t c = g.index(i, j, k);
        cplx s = kI * za.v[c];
        for (int d = 0; d < 3; ++d) {
          const std::size_t st = static_cast<std::size_t>(g.stride(d));
          const cplx gd = (8.0 * (phi.v[c + st] - phi.v[c - st]) - (phi.v[c + 2 * st] - phi.v[c - 2 * st])) / (12.0 * g.h(d));
          s += zeta0[static_cast<std::size_t>(d)] * gd;
        }
        num += std::norm(s);
        den += std::norm(za.v[c]);
      }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace cgoh
