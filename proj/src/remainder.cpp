#include <sstream>

#include "cgoh/cgo.hpp"
#include "cgoh/linsolve.hpp"
#include "cgoh/stencil.hpp"

namespace cgoh {

namespace {

bool on_boundary(const Grid3& g, int i, int j, int k) {
  return i == 0 || j == 0 || k == 0 || i == g.n(0) - 1 || j == g.n(1) - 1 || k == g.n(2) - 1;
}

// Rows of the conjugated operator (scaled by h^2) at interior nodes, with
// columns indexed by all grid nodes.
SparseMatrixC assemble_conjugated(const CgoSpec& spec, const VectorField3& A, const ScalarField& q, double k,
                                  RemainderStencil stencil, const std::vector<int>& row_of) {
  const Grid3& g = A.grid;
  const double h = spec.h;
  const Vec3 d = g.spacing();
  const ScalarField divA = divergence(A);
  std::vector<Eigen::Triplet<cplx, int>> t;
  t.reserve(g.size() * 7);
  int rows = 0;
  for (int kk = 1; kk < g.n(2) - 1; ++kk)
    for (int j = 1; j < g.n(1) - 1; ++j)
      for (int i = 1; i < g.n(0) - 1; ++i) {
        const int col = static_cast<int>(g.index(i, j, kk));
        const int row = row_of[col];
        ++rows;
        const Vec3 a = real(A.at(col));
        const double div = divA.v[col].real();
        if (stencil == RemainderStencil::Conjugated) {
          const SevenPoint s = forward_coefficients(a, div, q.v[col], k, d);
          t.emplace_back(row, col, h * h * s.centre);
          for (int ax = 0; ax < 3; ++ax) {
            const int st = static_cast<int>(g.stride(ax));
            const cplx e = std::exp(d[ax] * spec.zeta[ax] / h);
            t.emplace_back(row, col + st, h * h * s.plus[ax] * e);
            t.emplace_back(row, col - st, h * h * s.minus[ax] / e);
          }
        } else {
          cplx centre = h * h * (-kI * div + dot(a, a) + q.v[col] - k * k) - 2.0 * kI * h * dot(spec.zeta, a);
          for (int ax = 0; ax < 3; ++ax) {
            const int st = static_cast<int>(g.stride(ax));
            const double inv2 = 1.0 / (d[ax] * d[ax]);
            centre += 2.0 * h * h * inv2;
            const cplx conv = (2.0 * h * spec.zeta[ax] + 2.0 * kI * h * h * a[ax]) / (2.0 * d[ax]);
            t.emplace_back(row, col + st, -h * h * inv2 - conv);
            t.emplace_back(row, col - st, -h * h * inv2 + conv);
          }
          t.emplace_back(row, col, centre);
        }
      }
  SparseMatrixC M(rows, static_cast<int>(g.size()));
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

VectorC to_vector(const ScalarField& f) { return Eigen::Map<const VectorC>(f.v.data(), static_cast<int>(f.v.size())); }

}  // namespace

RemainderResult solve_remainder(const ScalarField& a, const CgoSpec& spec, const VectorField3& A,
                                const VectorField3& A_sharp, const ScalarField& q, double k,
                                const RemainderOptions& opts) {
  require_same_grid(a.grid, A.grid, "solve_remainder");
  require_same_grid(a.grid, A_sharp.grid, "solve_remainder");
  require_same_grid(a.grid, q.grid, "solve_remainder");
  if (!(spec.h > 0.0)) throw ParameterError("solve_remainder: h must be positive");
  const Grid3& g = a.grid;
  if (g.n(0) < 3 || g.n(1) < 3 || g.n(2) < 3) throw GridError("solve_remainder: grid has no interior");
  std::vector<int> row_of(g.size(), -1);
  int m = 0;
  for (int kk = 1; kk < g.n(2) - 1; ++kk)
    for (int j = 1; j < g.n(1) - 1; ++j)
      for (int i = 1; i < g.n(0) - 1; ++i) row_of[g.index(i, j, kk)] = m++;

  const SparseMatrixC L = assemble_conjugated(spec, A, q, k, opts.stencil, row_of);
  const VectorC rhs = -(L * to_vector(a));
  VectorC r = VectorC::Zero(static_cast<int>(g.size()));
  if (opts.boundary == RemainderBoundary::MinimalNorm) {
    // r = L^H w with (L L^H) w = rhs: the least-norm solution, no boundary data.
    const SparseMatrixC LH = L.adjoint();
    const SparseMatrixC N = L * LH;
    const HermitianSolver chol(N);
    r = LH * chol.solve(rhs);
  } else {
    // Zero Dirichlet data: keep only the interior columns.
    std::vector<Eigen::Triplet<cplx, int>> t;
    for (int c = 0; c < L.outerSize(); ++c)
      for (SparseMatrixC::InnerIterator it(L, c); it; ++it)
        if (row_of[c] >= 0) t.emplace_back(static_cast<int>(it.row()), row_of[c], it.value());
    SparseMatrixC S(m, m);
    S.setFromTriplets(t.begin(), t.end());
    const SparseLU lu(S);
    const VectorC ri = lu.solve(rhs);
    for (std::size_t n = 0; n < g.size(); ++n)
      if (row_of[n] >= 0) r[static_cast<int>(n)] = ri[row_of[n]];
  }
  RemainderResult out;
  out.relative_residual = relative_residual(L, r, rhs);
  if (!(out.relative_residual <= 1e-8)) {
    std::ostringstream os;
    os << "solve_remainder: relative residual " << out.relative_residual << " above 1e-8";
    throw SolverError(os.str());
  }
  out.r = ScalarField(g);
  for (std::size_t n = 0; n < g.size(); ++n) out.r.v[n] = r[static_cast<int>(n)];
  return out;
}

ScalarField apply_forward_stencil(const ScalarField& u, const VectorField3& A, const ScalarField& q, double k) {
  require_same_grid(u.grid, A.grid, "apply_forward_stencil");
  const Grid3& g = u.grid;
  const ScalarField divA = divergence(A);
  ScalarField out(g);
  for (int kk = 1; kk < g.n(2) - 1; ++kk)
    for (int j = 1; j < g.n(1) - 1; ++j)
      for (int i = 1; i < g.n(0) - 1; ++i) {
        const std::size_t n = g.index(i, j, kk);
        const SevenPoint s = forward_coefficients(real(A.at(n)), divA.v[n].real(), q.v[n], k, g.spacing());
        cplx acc = s.centre * u.v[n];
        for (int ax = 0; ax < 3; ++ax) {
          const std::size_t st = g.stride(ax);
          acc += s.plus[ax] * u.v[n + st] + s.minus[ax] * u.v[n - st];
        }
        out.v[n] = acc;
      }
  return out;
}

}  // namespace cgoh
