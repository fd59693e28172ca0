#include "cgoh/forward.hpp"

#include <sstream>

#include "cgoh/stencil.hpp"

namespace cgoh {

namespace {

bool face_node(const Grid3& g, int i, int j, int k) {
  return i == 0 || j == 0 || k == 0 || i == g.n(0) - 1 || j == g.n(1) - 1 || k == g.n(2) - 1;
}

VectorC to_vector(const ScalarField& f) { return Eigen::Map<const VectorC>(f.v.data(), static_cast<int>(f.v.size())); }

}  // namespace

DiscreteOperator::DiscreteOperator(const VectorField3& A, const ScalarField& q, double k, BoundaryKind bc)
    : A_(A), q_(q), k_(k), bc_(bc) {
  require_same_grid(A.grid, q.grid, "DiscreteOperator");
  const Grid3& g = A.grid;
  for (int d = 0; d < 3; ++d)
    if (g.n(d) < 4) throw GridError("forward: need at least 4 nodes per axis");
  for (std::size_t n = 0; n < g.size(); ++n) {
    for (int d = 0; d < 3; ++d)
      if (std::abs(A.c[d][n].imag()) > 0.0) throw ArgumentError("forward: A must be real");
    if (q.v[n].imag() > 0.0) throw ArgumentError("forward: Im q must be non-positive");
  }
  const ScalarField divA = divergence(A);
  std::vector<Eigen::Triplet<cplx, int>> t;
  t.reserve(g.size() * 7);
  for (int kk = 0; kk < g.n(2); ++kk)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const int row = static_cast<int>(g.index(i, j, kk));
        if (is_dirichlet_node(i, j, kk)) {
          t.emplace_back(row, row, 1.0);
          continue;
        }
        if (face_node(g, i, j, kk)) {
          // First-order one-sided d_n u along every outward axis of this node.
          const std::array<int, 3> idx{i, j, kk};
          cplx centre = 0.0;
          int faces = 0;
          for (int ax = 0; ax < 3; ++ax) {
            const int st = static_cast<int>(g.stride(ax));
            const double inv = 1.0 / g.h(ax);
            if (idx[ax] == 0) {
              centre += inv;
              t.emplace_back(row, row + st, -inv);
              ++faces;
            } else if (idx[ax] == g.n(ax) - 1) {
              centre += inv;
              t.emplace_back(row, row - st, -inv);
              ++faces;
            }
          }
          t.emplace_back(row, row, centre - kI * k * static_cast<double>(faces));
          continue;
        }
        const SevenPoint s = forward_coefficients(real(A.at(row)), divA.v[row].real(), q.v[row], k, g.spacing());
        t.emplace_back(row, row, s.centre);
        for (int ax = 0; ax < 3; ++ax) {
          const int st = static_cast<int>(g.stride(ax));
          t.emplace_back(row, row + st, s.plus[ax]);
          t.emplace_back(row, row - st, s.minus[ax]);
        }
      }
  matrix_ = SparseMatrixC(static_cast<int>(g.size()), static_cast<int>(g.size()));
  matrix_.setFromTriplets(t.begin(), t.end());
  try {
    lu_ = std::make_shared<SparseLU>(matrix_);
  } catch (const SolverError& e) {
    throw ResonanceError(std::string("forward: ") + e.what() + " (k^2 at or near a discrete eigenvalue)");
  }
}

bool DiscreteOperator::is_boundary_node(int i, int j, int kk) const { return face_node(grid(), i, j, kk); }

bool DiscreteOperator::is_dirichlet_node(int i, int j, int kk) const {
  const Grid3& g = grid();
  if (bc_ == BoundaryKind::Dirichlet) return face_node(g, i, j, kk);
  return kk == g.n(2) - 1;
}

double DiscreteOperator::condition() const {
  if (condition_ < 0.0) condition_ = lu_->condition_estimate();
  return condition_;
}

ScalarField DiscreteOperator::solve(const ScalarField& boundary, const ScalarField* forcing) const {
  const Grid3& g = grid();
  require_same_grid(g, boundary.grid, "DiscreteOperator::solve");
  if (forcing) require_same_grid(g, forcing->grid, "DiscreteOperator::solve");
  VectorC rhs = VectorC::Zero(static_cast<int>(g.size()));
  for (int kk = 0; kk < g.n(2); ++kk)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, kk);
        if (is_dirichlet_node(i, j, kk))
          rhs[static_cast<int>(n)] = boundary.v[n];
        else if (forcing && !face_node(g, i, j, kk))
          rhs[static_cast<int>(n)] = forcing->v[n];
      }
  const VectorC x = lu_->solve(rhs);
  const double res = relative_residual(matrix_, x, rhs);
  if (!(res <= 1e-10)) {
    std::ostringstream os;
    os << "forward: relative residual " << res << " above 1e-10 (condition estimate " << condition() << ")";
    throw SolverError(os.str());
  }
  ScalarField u(g);
  for (std::size_t n = 0; n < g.size(); ++n) u.v[n] = x[static_cast<int>(n)];
  return u;
}

std::shared_ptr<DiscreteOperator> build_operator(const VectorField3& A, const ScalarField& q, double k,
                                                 BoundaryKind bc) {
  auto op = std::make_shared<DiscreteOperator>(A, q, k, bc);
  const double c = op->condition();
  if (!(c < kResonanceCondition)) {
    std::ostringstream os;
    os << "forward: condition estimate " << c << " indicates a discrete resonance at k = " << k;
    throw ResonanceError(os.str());
  }
  return op;
}

ScalarField solve_dirichlet(const DiscreteOperator& op, const ScalarField& boundary, const ScalarField* forcing) {
  return op.solve(boundary, forcing);
}

Grid2 top_face(const Grid3& g) {
  return Grid2({g.box().lo[0], g.box().lo[1]}, {g.box().hi[0], g.box().hi[1]}, {g.n(0), g.n(1)});
}

ScalarField embed_top_face(const Grid3& g, const PlaneField& f) {
  if (f.grid.n[0] != g.n(0) || f.grid.n[1] != g.n(1)) throw GridError("embed_top_face: plane grid does not match");
  ScalarField out(g);
  const int top = g.n(2) - 1;
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i) out(i, j, top) = f(i, j);
  return out;
}

PlaneField top_face_values(const ScalarField& u) {
  const Grid3& g = u.grid;
  PlaneField out(top_face(g));
  const int top = g.n(2) - 1;
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i) out(i, j) = u(i, j, top);
  return out;
}

PlaneField conormal_trace(const ScalarField& u, const VectorField3& A) {
  require_same_grid(u.grid, A.grid, "conormal_trace");
  const Grid3& g = u.grid;
  PlaneField out(top_face(g));
  const int t = g.n(2) - 1;
  const double inv = 1.0 / (2.0 * g.h(2));
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i) {
      const cplx dn = (3.0 * u(i, j, t) - 4.0 * u(i, j, t - 1) + u(i, j, t - 2)) * inv;
      out(i, j) = dn + kI * A.c[2][g.index(i, j, t)] * u(i, j, t);
    }
  return out;
}

DnMapSample dn_map(const DiscreteOperator& op, const PlaneField& f, const FacePatch& gamma2, const FacePatch& gamma1) {
  const Grid3& g = op.grid();
  DnMapSample s{PlaneField(top_face(g)), PlaneField(top_face(g)), gamma1, gamma2};
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i) {
      if (gamma2.contains(i, j))
        s.f(i, j) = f(i, j);
      else if (f(i, j) != 0.0)
        throw SupportError("dn_map: Dirichlet datum is not supported in gamma2");
    }
  const ScalarField u = op.solve(embed_top_face(g, s.f));
  const PlaneField tr = conormal_trace(u, op.A());
  for (int j = 0; j < g.n(1); ++j)
    for (int i = 0; i < g.n(0); ++i)
      if (gamma1.contains(i, j)) s.trace(i, j) = tr(i, j);
  return s;
}

GaugeCheck gauge_check(const VectorField3& A, const ScalarField& q, double k, const ScalarField& psi,
                       const PlaneField& f, BoundaryKind bc) {
  const Grid3& g = A.grid;
  require_same_grid(g, psi.grid, "gauge_check");
  for (const auto& v : psi.v)
    if (v.imag() != 0.0) throw ArgumentError("gauge_check: psi must be real");
  const VectorField3 dpsi = gradient(psi);
  VectorField3 A2 = A;
  for (int d = 0; d < 3; ++d)
    for (std::size_t n = 0; n < g.size(); ++n) A2.c[d][n] = A.c[d][n] + cplx(dpsi.c[d][n].real(), 0.0);

  const PlaneField psi_top = top_face_values(psi);
  GaugeCheck out;
  const DiscreteOperator op2(A2, q, k, bc);
  out.lhs = conormal_trace(op2.solve(embed_top_face(g, f)), A2);

  const DiscreteOperator op1(A, q, k, bc);
  PlaneField ef(f.grid);
  for (std::size_t n = 0; n < ef.v.size(); ++n) ef.v[n] = std::exp(kI * psi_top.v[n].real()) * f.v[n];
  const PlaneField tr1 = conormal_trace(op1.solve(embed_top_face(g, ef)), A);
  out.rhs = PlaneField(f.grid);
  for (std::size_t n = 0; n < tr1.v.size(); ++n) out.rhs.v[n] = std::exp(-kI * psi_top.v[n].real()) * tr1.v[n];

  PlaneField diff(f.grid);
  for (std::size_t n = 0; n < diff.v.size(); ++n) diff.v[n] = out.lhs.v[n] - out.rhs.v[n];
  const double scale = l2_norm(out.lhs);
  out.discrepancy = scale > 0.0 ? l2_norm(diff) / scale : l2_norm(diff);
  return out;
}

namespace {

// Central differences inside, third-order one-sided closures on the faces so
// that the face layer does not add a spacing^3 term to the identity.
ScalarField closed_partial(const ScalarField& f, int axis, bool second) {
  const Grid3& g = f.grid;
  const int n = g.n(axis);
  if (n < 5) throw GridError("greens_residual: need at least 5 nodes along each axis");
  const std::size_t s = g.stride(axis);
  const double h = g.h(axis);
  ScalarField out(g);
  for (int k = 0; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::array<int, 3> idx{i, j, k};
        const int p = idx[axis];
        const std::size_t c = g.index(i, j, k);
        if (p == 0 || p == n - 1) {
          // Stencil toward the interior; odd derivatives flip sign on the far face.
          const long dir = p == 0 ? 1 : -1;
          auto at = [&](int m) { return f.v[static_cast<std::size_t>(static_cast<long>(c) + dir * m * static_cast<long>(s))]; };
          if (second)
            out.v[c] = (35.0 * at(0) - 104.0 * at(1) + 114.0 * at(2) - 56.0 * at(3) + 11.0 * at(4)) / (12.0 * h * h);
          else
            out.v[c] = double(dir) * (-11.0 * at(0) + 18.0 * at(1) - 9.0 * at(2) + 2.0 * at(3)) / (6.0 * h);
        } else if (second) {
          out.v[c] = (f.v[c + s] - 2.0 * f.v[c] + f.v[c - s]) / (h * h);
        } else {
          out.v[c] = (f.v[c + s] - f.v[c - s]) / (2.0 * h);
        }
      }
  return out;
}

VectorField3 closed_gradient(const ScalarField& u) {
  VectorField3 out(u.grid, false);
  for (int d = 0; d < 3; ++d) out.c[d] = closed_partial(u, d, false).v;
  return out;
}

// (L_{A,q} u) at every node.
ScalarField apply_continuum(const ScalarField& u, const VectorField3& A, const ScalarField& q, bool conj_q) {
  ScalarField lap(u.grid);
  for (int d = 0; d < 3; ++d) {
    const ScalarField p = closed_partial(u, d, true);
    for (std::size_t n = 0; n < lap.v.size(); ++n) lap.v[n] += p.v[n];
  }
  const VectorField3 gu = closed_gradient(u);
  ScalarField divA(u.grid);
  for (int d = 0; d < 3; ++d) {
    const ScalarField p = closed_partial(A.component(d), d, false);
    for (std::size_t n = 0; n < divA.v.size(); ++n) divA.v[n] += p.v[n];
  }
  ScalarField out(u.grid);
  for (std::size_t n = 0; n < out.v.size(); ++n) {
    const CVec3 a = A.at(n);
    cplx adg = 0.0, aa = 0.0;
    for (int d = 0; d < 3; ++d) {
      adg += a[d] * gu.c[d][n];
      aa += a[d] * a[d];
    }
    const cplx qq = conj_q ? std::conj(q.v[n]) : q.v[n];
    out.v[n] = -lap.v[n] - 2.0 * kI * adg - kI * divA.v[n] * u.v[n] + aa * u.v[n] + qq * u.v[n];
  }
  return out;
}

}  // namespace

double greens_residual(const ScalarField& u, const ScalarField& v, const VectorField3& A, const ScalarField& q,
                       bool conjugate_q) {
  const Grid3& g = u.grid;
  require_same_grid(g, v.grid, "greens_residual");
  require_same_grid(g, A.grid, "greens_residual");
  require_same_grid(g, q.grid, "greens_residual");
  const ScalarField Lu = apply_continuum(u, A, q, false);
  const ScalarField Lv = apply_continuum(v, A, q, conjugate_q);
  ScalarField vol(g);
  for (std::size_t n = 0; n < vol.v.size(); ++n) vol.v[n] = Lu.v[n] * std::conj(v.v[n]) - u.v[n] * std::conj(Lv.v[n]);
  const cplx volume = integrate(vol);

  // Boundary term: -sum over faces of [(d_n + i A.n) u conj(v) - u conj((d_n + i A.n) v)].
  const VectorField3 gu = closed_gradient(u), gv = closed_gradient(v);
  cplx surface = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    const int a1 = (ax + 1) % 3, a2 = (ax + 2) % 3;
    const double dS = g.h(a1) * g.h(a2);
    for (int side = 0; side < 2; ++side) {
      const int p = side == 0 ? 0 : g.n(ax) - 1;
      const double sign = side == 0 ? -1.0 : 1.0;
      for (int t2 = 0; t2 < g.n(a2); ++t2)
        for (int t1 = 0; t1 < g.n(a1); ++t1) {
          std::array<int, 3> idx{};
          idx[ax] = p;
          idx[a1] = t1;
          idx[a2] = t2;
          const std::size_t n = g.index(idx[0], idx[1], idx[2]);
          const double w = trap_weight(t1, g.n(a1)) * trap_weight(t2, g.n(a2)) * dS;
          const cplx an = sign * A.c[ax][n];
          const cplx cu = sign * gu.c[ax][n] + kI * an * u.v[n];
          const cplx cv = sign * gv.c[ax][n] + kI * an * v.v[n];
          surface += w * (cu * std::conj(v.v[n]) - u.v[n] * std::conj(cv));
        }
    }
  }
  return std::abs(volume + surface);
}

std::vector<RadiationRow> radiation_residual(const ScalarField& u, const Vec3& centre, double k,
                                             const std::vector<double>& radii) {
  const Grid3& g = u.grid;
  const VectorField3 gu = gradient(u);
  const std::array<ScalarField, 3> gc{gu.component(0), gu.component(1), gu.component(2)};
  // Gauss-Legendre in cos(theta) times a uniform rule in phi.
  constexpr int nt = 48, np = 96;
  std::array<double, nt> xs{}, ws{};
  for (int i = 0; i < nt; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (nt + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= nt; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      const double dp = nt * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        double q0 = 1.0, q1 = x;
        for (int n = 2; n <= nt; ++n) {
          const double q2 = ((2.0 * n - 1.0) * x * q1 - (n - 1.0) * q0) / n;
          q0 = q1;
          q1 = q2;
        }
        ws[i] = 2.0 / ((1.0 - x * x) * std::pow(nt * (x * q1 - q0) / (x * x - 1.0), 2));
        break;
      }
    }
    xs[i] = x;
  }
  std::vector<RadiationRow> out;
  for (const double R : radii) {
    if (!(R > 0.0)) throw ArgumentError("radiation_residual: radii must be positive");
    for (int d = 0; d < 3; ++d)
      if (centre[d] - R < g.box().lo[d] || centre[d] + R > g.box().hi[d])
        throw ArgumentError("radiation_residual: sphere leaves the grid box");
    double acc = 0.0;
    for (int a = 0; a < nt; ++a) {
      const double ct = xs[a], st = std::sqrt(1.0 - ct * ct);
      for (int b = 0; b < np; ++b) {
        const double ph = 2.0 * kPi * b / np;
        const Vec3 nrm{st * std::cos(ph), st * std::sin(ph), ct};
        const Vec3 x = add(centre, scale(nrm, R));
        cplx dr = 0.0;
        for (int d = 0; d < 3; ++d) dr += nrm[d] * interpolate(gc[d], x, Interp::Tricubic);
        const cplx val = dr - kI * k * interpolate(u, x, Interp::Tricubic);
        acc += ws[a] * (2.0 * kPi / np) * R * R * std::norm(val);
      }
    }
    out.push_back({R, acc});
  }
  return out;
}

}  // namespace cgoh
