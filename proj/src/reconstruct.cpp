#include "cgoh/reconstruct.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace cgoh {

void ProblemSetup::validate() const {
  const Grid3& g = grid();
  require_same_grid(g, A2.grid, "problem setup");
  require_same_grid(g, q1.grid, "problem setup");
  require_same_grid(g, q2.grid, "problem setup");
  if (!g.symmetric_about_plane()) throw GridError("problem setup: grid must be node-symmetric about x3 = 0");
  const int p = g.plane_row();
  for (int kk = 0; kk < g.n(2); ++kk)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const std::size_t n = g.index(i, j, kk), m = g.index(i, j, g.mirror_row(kk));
        const bool ok = A1.c[0][n] == A1.c[0][m] && A1.c[1][n] == A1.c[1][m] && A1.c[2][n] == -A1.c[2][m] &&
                        A2.c[0][n] == A2.c[0][m] && A2.c[1][n] == A2.c[1][m] && A2.c[2][n] == -A2.c[2][m] &&
                        q1.v[n] == q1.v[m] && q2.v[n] == q2.v[m];
        if (!ok) throw PreconditionError("problem setup: potentials are not reflection extensions");
        (void)p;
      }
}

ReflectedPair prepare_potentials(const VectorField3& A_lower, const ScalarField& q_lower) {
  return extend_reflect(normalize_gauge(A_lower).A, q_lower);
}

GammaPair choose_gammas(const Vec3& xi) {
  const double perp = std::hypot(xi[0], xi[1]);
  const double len = norm(xi);
  if (!(perp > 1e-12 * std::max(1.0, len))) {
    std::ostringstream os;
    os << "choose_gammas: xi = (" << xi[0] << ", " << xi[1] << ", " << xi[2] << ") lies on the line xi1 = xi2 = 0";
    throw ExclusionError(os.str());
  }
  GammaPair g;
  g.gamma1 = {-xi[1] / perp, xi[0] / perp, 0.0};
  g.gamma2 = scale(cross(xi, g.gamma1), 1.0 / len);
  return g;
}

// ---- workspace ----------------------------------------------------------------

Workspace Workspace::make(const ProblemSetup& s, int margin) {
  s.validate();
  const Grid3& G = s.grid();
  const int p = G.plane_row();
  IndexBox N{{G.n(0), G.n(1), G.n(2)}, {-1, -1, -1}};
  for (int kk = 0; kk <= p; ++kk)
    for (int j = 0; j < G.n(1); ++j)
      for (int i = 0; i < G.n(0); ++i) {
        const std::size_t n = G.index(i, j, kk);
        const bool any = norm(s.A1.at(n)) > 0.0 || norm(s.A2.at(n)) > 0.0 || s.q1.v[n] != 0.0 || s.q2.v[n] != 0.0;
        if (!any) continue;
        const std::array<int, 3> idx{i, j, kk};
        for (int d = 0; d < 3; ++d) {
          N.lo[d] = std::min(N.lo[d], idx[d]);
          N.hi[d] = std::max(N.hi[d], idx[d]);
        }
      }
  if (N.hi[0] < 0) N = IndexBox{{1, 1, 1}, {G.n(0) - 2, G.n(1) - 2, p}};
  N = grow(N, margin, G);
  N.hi[2] = std::min(N.hi[2], p);
  if (N.lo[2] >= p) N.lo[2] = std::max(0, p - 2);

  Workspace ws;
  ws.W_index = N;
  ws.W_index.hi[2] = G.mirror_row(N.lo[2]);
  ws.W = G.subgrid(ws.W_index);
  ws.N = N;
  for (int d = 0; d < 3; ++d) {
    ws.N.lo[d] -= ws.W_index.lo[d];
    ws.N.hi[d] -= ws.W_index.lo[d];
  }
  const VectorField3 dA = s.A2 - s.A1;
  ws.A1 = restrict_to(s.A1, ws.W_index);
  ws.A2 = restrict_to(s.A2, ws.W_index);
  ws.dA = restrict_to(dA, ws.W_index);
  ScalarField c0(G);
  ScalarField absA(G), absq(G);
  for (std::size_t n = 0; n < G.size(); ++n) {
    const CVec3 a1 = s.A1.at(n), a2 = s.A2.at(n);
    c0.v[n] = dot(a1, a1) - dot(a2, a2) + s.q1.v[n] - s.q2.v[n];
    absA.v[n] = norm(dA.at(n));
    absq.v[n] = std::abs(s.q1.v[n] - s.q2.v[n]);
  }
  ws.c0 = restrict_to(c0, ws.W_index);
  ws.scale_A = integrate(absA).real();
  ws.scale_q = integrate(absq).real();
  return ws;
}

// ---- quadrature ------------------------------------------------------------------

std::vector<cplx> filon_weights(double z0, double dz, int n, double omega) {
  if (n < 2) throw ArgumentError("filon_weights: need at least two nodes");
  const double th = omega * dz;
  cplx interior, left, right;
  if (std::abs(th) < 1.0) {
    // Series of the hat-function moments; terms fall off like th^m / (m+2)!.
    cplx l = 0.0, r = 0.0, term = 1.0;
    double fact = 2.0;  // (m+2)!
    for (int m = 0; m < 24; ++m) {
      l += term / fact;
      r += (m % 2 == 0 ? 1.0 : -1.0) * term / fact;
      term *= kI * th;
      fact *= (m + 3);
    }
    left = l;
    right = r;
    if (th == 0.0) {
      interior = 1.0;
    } else {
      const double s = std::sin(0.5 * th) / (0.5 * th);
      interior = s * s;
    }
  } else {
    const cplx e = std::exp(kI * th);
    left = kI / th - (e - 1.0) / (th * th);
    right = -kI / th - (std::conj(e) - 1.0) / (th * th);
    const double s = std::sin(0.5 * th) / (0.5 * th);
    interior = s * s;
  }
  std::vector<cplx> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const cplx c = k == 0 ? left : (k == n - 1 ? right : interior);
    w[static_cast<std::size_t>(k)] = dz * c * std::exp(kI * omega * (z0 + k * dz));
  }
  return w;
}

std::vector<cplx> spline_filon_weights(double z0, double dz, int n, double omega) {
  if (n < 2) throw ArgumentError("spline_filon_weights: need at least two nodes");
  const double th = omega * dz;
  const double sn = std::sin(0.5 * th);
  const double sinc = th == 0.0 ? 1.0 : sn / (0.5 * th);
  const double c = std::pow(sinc, 4) / (1.0 - 2.0 / 3.0 * sn * sn);
  std::vector<cplx> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = dz * c * std::exp(kI * omega * (z0 + k * dz));
  return w;
}

namespace {

std::vector<cplx> trapezoid_phase(double z0, double dz, int n, double omega) {
  std::vector<cplx> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = trap_weight(k, n) * dz * std::exp(kI * omega * (z0 + k * dz));
  return w;
}

}  // namespace

IdentityTerms evaluate_identity(const Workspace& ws, const CgoParams& p, const ScalarField& P1,
                                const ScalarField& P2) {
  const Grid3& W = ws.W;
  require_same_grid(W, P1.grid, "evaluate_identity");
  require_same_grid(W, P2.grid, "evaluate_identity");
  const PhaseProducts pp = phase_products(p);
  const VectorField3 G1 = gradient(P1), G2 = gradient(P2);
  const double h = p.h;
  const std::array<CVec3, 2> Z1{p.zeta.zeta1, reflect(p.zeta.zeta1)};
  const std::array<CVec3, 2> Z2c{conj(p.zeta.zeta2), conj(reflect(p.zeta.zeta2))};
  const std::array<Vec3, 4> freq{imag(pp.k00), imag(pp.k01), imag(pp.k10), imag(pp.k11)};

  const IndexBox& N = ws.N;
  std::array<int, 3> n{};
  for (int d = 0; d < 3; ++d) n[d] = N.hi[d] - N.lo[d] + 1;
  std::array<std::array<std::vector<cplx>, 3>, 4> wt;
  for (int t = 0; t < 4; ++t)
    for (int d = 0; d < 3; ++d) {
      const double z0 = W.coord(d, N.lo[d]);
      const bool cross_term = (t == 1 || t == 2) && d == 2;
      wt[t][d] = cross_term ? spline_filon_weights(z0, W.h(d), n[d], freq[t][d]) : trapezoid_phase(z0, W.h(d), n[d], freq[t][d]);
    }

  std::array<cplx, 4> mag{}, zer{};
  for (int kk = N.lo[2]; kk <= N.hi[2]; ++kk) {
    const int km = W.n(2) - 1 - kk;
    for (int j = N.lo[1]; j <= N.hi[1]; ++j)
      for (int i = N.lo[0]; i <= N.hi[0]; ++i) {
        const std::size_t x = W.index(i, j, kk), xm = W.index(i, j, km);
        const CVec3 dA = ws.dA.at(x);
        const cplx c0 = ws.c0.v[x];
        if (dA[0] == 0.0 && dA[1] == 0.0 && dA[2] == 0.0 && c0 == 0.0) continue;
        const std::array<cplx, 2> p1{P1.v[x], P1.v[xm]};
        const std::array<cplx, 2> p2c{std::conj(P2.v[x]), std::conj(P2.v[xm])};
        const std::array<CVec3, 2> g1{G1.at(x), reflect(G1.at(xm))};
        const std::array<CVec3, 2> g2c{conj(G2.at(x)), conj(reflect(G2.at(xm)))};
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t) {
            cplx m = 0.0;
            for (int d = 0; d < 3; ++d) {
              const cplx d1 = Z1[s][d] / h * p1[s] + g1[s][d];
              const cplx d2 = Z2c[t][d] / h * p2c[t] + g2c[t][d];
              m += dA[d] * (d1 * p2c[t] - p1[s] * d2);
            }
            const int st = 2 * s + t;
            const cplx w = wt[st][0][i - N.lo[0]] * wt[st][1][j - N.lo[1]] * wt[st][2][kk - N.lo[2]];
            mag[st] += w * kI * m;
            zer[st] += w * c0 * p1[s] * p2c[t];
          }
      }
  }
  IdentityTerms out;
  out.h = h;
  const std::array<double, 4> sign{1.0, -1.0, -1.0, 1.0};
  for (int st = 0; st < 4; ++st) {
    out.magnetic_term += sign[st] * mag[st];
    out.zero_order_term += sign[st] * zer[st];
    out.pair_terms[st] = sign[st] * (mag[st] + zer[st]);
  }
  return out;
}

// ---- CGO pairs ---------------------------------------------------------------------

AmplitudeStrip strip_amplitude(const ScalarField& phi1_0, const ScalarField& phi2_0, const CVec3& w,
                               const VectorField3& A1, const VectorField3& A2, double tol) {
  require_same_grid(phi1_0.grid, phi2_0.grid, "strip_amplitude");
  require_same_grid(phi1_0.grid, A1.grid, "strip_amplitude");
  require_same_grid(phi1_0.grid, A2.grid, "strip_amplitude");
  ScalarField psi(phi1_0.grid);
  for (std::size_t n = 0; n < psi.v.size(); ++n) psi.v[n] = phi1_0.v[n] + std::conj(phi2_0.v[n]);
  AmplitudeStrip out;
  out.residual = transport_residual(psi, A1 - A2, w);
  if (!(out.residual <= tol)) {
    std::ostringstream os;
    os << "strip_amplitude: transport residual of the weight " << out.residual << " above " << tol;
    throw AmplitudeError(os.str());
  }
  out.g = ScalarField(psi.grid);
  for (std::size_t n = 0; n < psi.v.size(); ++n) out.g.v[n] = std::exp(-psi.v[n]);
  return out;
}

namespace {

ScalarField exp_times(const ScalarField* g, const ScalarField& phi) {
  ScalarField out(phi.grid);
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] = (g ? g->v[n] : cplx(1.0)) * std::exp(phi.v[n]);
  return out;
}

// Phases of u1 and u2 (limit and mollified) on a target grid.
struct PairPhases {
  ScalarField phi1, phi2;
};

PairPhases pair_phases(const ProblemSetup& s, const CgoParams& p, const Grid3& target, const SliceOptions& slice,
                       bool mollified) {
  const CgoSpec s1 = p.first(), s2 = p.second();
  const VectorField3 A1 = mollified ? mollify(s.A1, p.epsilon).sharp : s.A1;
  const VectorField3 A2 = mollified ? mollify(s.A2, p.epsilon).sharp : s.A2;
  return {solve_transport_phase_on(A1, s1.zeta0, s1.frame, target, slice),
          solve_transport_phase_on(A2, s2.zeta0, s2.frame, target, slice)};
}

IdentityTerms pair_integral(const ProblemSetup& s, const Workspace& ws, const CgoParams& p, const PairOptions& opts,
                            const ScalarField* g) {
  if (!opts.with_remainder) {
    const PairPhases ph = pair_phases(s, p, ws.W, opts.slice, true);
    return evaluate_identity(ws, p, exp_times(g, ph.phi1), exp_times(nullptr, ph.phi2));
  }
  // Extended box for the remainder solve around W.
  const Grid3& G = s.grid();
  const IndexBox ob = grow(ws.W_index, 4, G);
  const Grid3 O = G.subgrid(ob);
  IndexBox wi;
  for (int d = 0; d < 3; ++d) {
    wi.lo[d] = ws.W_index.lo[d] - ob.lo[d];
    wi.hi[d] = ws.W_index.hi[d] - ob.lo[d];
  }
  const PairPhases ph = pair_phases(s, p, O, opts.slice, true);
  ScalarField gO(O, 1.0);
  if (g) {
    // The weight is only known on W; outside W it is continued by 1, where
    // the integrands vanish anyway.
    for (int kk = wi.lo[2]; kk <= wi.hi[2]; ++kk)
      for (int j = wi.lo[1]; j <= wi.hi[1]; ++j)
        for (int i = wi.lo[0]; i <= wi.hi[0]; ++i) gO(i, j, kk) = (*g)(i - wi.lo[0], j - wi.lo[1], kk - wi.lo[2]);
  }
  const ScalarField a1 = exp_times(&gO, ph.phi1), a2 = exp_times(nullptr, ph.phi2);
  const VectorField3 A1 = restrict_to(s.A1, ob), A2 = restrict_to(s.A2, ob);
  const ScalarField q1 = restrict_to(s.q1, ob);
  const ScalarField q2c = conj(restrict_to(s.q2, ob));
  const VectorField3 A1s = mollify(s.A1, p.epsilon).sharp, A2s = mollify(s.A2, p.epsilon).sharp;
  const RemainderResult r1 = solve_remainder(a1, p.first(), A1, restrict_to(A1s, ob), q1, s.k);
  const RemainderResult r2 = solve_remainder(a2, p.second(), A2, restrict_to(A2s, ob), q2c, s.k);
  return evaluate_identity(ws, p, restrict_to(a1 + r1.r, wi), restrict_to(a2 + r2.r, wi));
}

cplx direct_limit(const Workspace& ws, const Vec3& xi, const CVec3& w, IdentityKind kind, const ScalarField& psi0,
                  const ScalarField* g) {
  const Grid3& W = ws.W;
  cplx acc = 0.0;
  std::array<std::vector<cplx>, 3> e;
  for (int d = 0; d < 3; ++d) e[d] = trapezoid_phase(W.box().lo[d], W.h(d), W.n(d), xi[d]);
  for (int kk = 0; kk < W.n(2); ++kk)
    for (int j = 0; j < W.n(1); ++j)
      for (int i = 0; i < W.n(0); ++i) {
        const std::size_t n = W.index(i, j, kk);
        const cplx f = kind == IdentityKind::Magnetic ? dot(w, ws.dA.at(n)) : ws.c0.v[n];
        if (f == 0.0) continue;
        const cplx weight = (g ? g->v[n] : cplx(1.0)) * std::exp(psi0.v[n]);
        acc += e[0][i] * e[1][j] * e[2][kk] * f * weight;
      }
  return acc;
}

std::string format_table(const LimitResult& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (const auto& row : r.table) os << "  h=" << row.h << " value=" << row.value << "\n";
  os << "  extrapolated=" << r.extrapolated << " direct=" << r.direct << " discrepancy=" << r.discrepancy;
  return os.str();
}

}  // namespace

IdentityTerms cgo_pair_integral(const ProblemSetup& s, const CgoParams& p, const PairOptions& opts) {
  const Workspace ws = Workspace::make(s);
  std::optional<ScalarField> g;
  if (opts.weight_device) {
    const PairPhases ph0 = pair_phases(s, p, ws.W, opts.slice, false);
    const CgoSpec s1 = p.first();
    g = strip_amplitude(ph0.phi1, ph0.phi2, s1.zeta0, ws.A1, ws.A2, std::numeric_limits<double>::infinity()).g;
  }
  return pair_integral(s, ws, p, opts, g ? &*g : nullptr);
}

cplx richardson(cplx t1, cplx t2, double ratio, double order) {
  const double f = std::pow(ratio, order);
  return (f * t2 - t1) / (f - 1.0);
}

namespace {

cplx scaled_value(const IdentityTerms& t, IdentityKind kind) {
  const cplx S = t.magnetic_term + t.zero_order_term;
  return kind == IdentityKind::Magnetic ? t.h * S / (2.0 * kI) : S;
}

void finish_limit(LimitResult& r, double scale, const LimitOptions& opts) {
  const std::size_t n = r.table.size();
  if (n < 2) throw ArgumentError("limit: need at least two h values");
  r.extrapolated = richardson(r.table[n - 2].value, r.table[n - 1].value, r.table[n - 2].h / r.table[n - 1].h,
                              opts.order);
  r.previous = n >= 3 ? richardson(r.table[n - 3].value, r.table[n - 2].value, r.table[n - 3].h / r.table[n - 2].h,
                                   opts.order)
                      : r.extrapolated;
  const double diff = std::abs(r.extrapolated - r.direct);
  r.discrepancy = scale > 0.0 ? diff / scale : diff;
}

}  // namespace

std::vector<double> limit_h_values(const LimitOptions& opts, const Vec3& xi) {
  if (opts.h_sequence.size() < 2) throw ArgumentError("limit: h sequence needs at least two values");
  const std::size_t take = std::min<std::size_t>(std::max(2, opts.richardson_points), opts.h_sequence.size());
  std::vector<double> hs(opts.h_sequence.end() - static_cast<long>(take), opts.h_sequence.end());
  for (std::size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1])) throw ArgumentError("limit: h sequence must be decreasing");
  for (double h : hs)
    if (!(h * norm(xi) / 2.0 < 1.0)) throw ParameterError("limit: h |xi| / 2 >= 1 in the extrapolation window");
  return hs;
}

namespace {

LimitResult limit_core(const Workspace& ws, const Vec3& xi, const GammaPair& gp, IdentityKind kind,
                       const LimitOptions& opts, const ScalarField& phi1_0, const ScalarField& phi2_0,
                       const std::function<IdentityTerms(const CgoParams&, const ScalarField*)>& at_h) {
  const std::vector<double> hs = limit_h_values(opts, xi);
  const CgoParams p0 = CgoParams::make(hs.back(), xi, gp.gamma1, gp.gamma2);
  const CVec3 w = p0.first().zeta0;
  ScalarField psi0(ws.W);
  for (std::size_t n = 0; n < psi0.v.size(); ++n) psi0.v[n] = phi1_0.v[n] + std::conj(phi2_0.v[n]);
  std::optional<ScalarField> g;
  if (opts.pair.weight_device)
    g = strip_amplitude(phi1_0, phi2_0, w, ws.A1, ws.A2, std::numeric_limits<double>::infinity()).g;

  LimitResult r;
  r.direct = direct_limit(ws, xi, w, kind, psi0, g ? &*g : nullptr);
  for (double h : hs) {
    const CgoParams p = CgoParams::make(h, xi, gp.gamma1, gp.gamma2);
    const IdentityTerms t = at_h(p, g ? &*g : nullptr);
    r.table.push_back({h, scaled_value(t, kind), t.pair_terms});
  }
  finish_limit(r, kind == IdentityKind::Magnetic ? ws.scale_A : ws.scale_q, opts);
  return r;
}

}  // namespace

LimitResult limit_from_phases(const Workspace& ws, const Vec3& xi, const GammaPair& gammas, IdentityKind kind,
                              const LimitOptions& opts, const LimitPhases& ph) {
  const std::size_t nh = limit_h_values(opts, xi).size();
  if (ph.phi1.size() != nh || ph.phi2.size() != nh) throw ArgumentError("limit_from_phases: one phase pair per h");
  std::size_t next = 0;
  return limit_core(ws, xi, gammas, kind, opts, ph.phi1_0, ph.phi2_0,
                    [&](const CgoParams& p, const ScalarField* g) {
                      const std::size_t i = next++;
                      return evaluate_identity(ws, p, exp_times(g, ph.phi1[i]), exp_times(nullptr, ph.phi2[i]));
                    });
}

LimitResult limit_identity(const ProblemSetup& s, const Vec3& xi, int gamma2_sign, IdentityKind kind,
                           const LimitOptions& opts) {
  if (gamma2_sign != 1 && gamma2_sign != -1) throw ArgumentError("limit_identity: gamma2 sign must be +1 or -1");
  GammaPair gp = choose_gammas(xi);
  gp.gamma2 = scale(gp.gamma2, gamma2_sign);
  const std::vector<double> hs = limit_h_values(opts, xi);
  const Workspace ws = Workspace::make(s);
  const CgoParams p0 = CgoParams::make(hs.back(), xi, gp.gamma1, gp.gamma2);
  const PairPhases ph0 = pair_phases(s, p0, ws.W, opts.pair.slice, false);
  const LimitResult r = limit_core(ws, xi, gp, kind, opts, ph0.phi1, ph0.phi2,
                                   [&](const CgoParams& p, const ScalarField* g) {
                                     return pair_integral(s, ws, p, opts.pair, g);
                                   });
  if (r.discrepancy > opts.tolerance)
    throw ConvergenceError("limit_identity: extrapolation discrepancy above tolerance\n" + format_table(r));
  return r;
}

// ---- lattice ---------------------------------------------------------------------

std::array<int, 3> XiLattice::m(std::size_t idx) const {
  const std::size_t nn = static_cast<std::size_t>(n);
  return {static_cast<int>(idx % nn) + lo(), static_cast<int>((idx / nn) % nn) + lo(),
          static_cast<int>(idx / (nn * nn)) + lo()};
}

bool XiLattice::contains(const std::array<int, 3>& mm) const {
  for (int d = 0; d < 3; ++d)
    if (mm[d] < lo() || mm[d] >= lo() + n) return false;
  return true;
}

std::size_t XiLattice::index(const std::array<int, 3>& mm) const {
  if (!contains(mm)) throw ArgumentError("lattice: index outside the lattice");
  const std::size_t nn = static_cast<std::size_t>(n);
  return static_cast<std::size_t>(mm[0] - lo()) + nn * (static_cast<std::size_t>(mm[1] - lo()) + nn * static_cast<std::size_t>(mm[2] - lo()));
}

Vec3 XiLattice::xi(std::size_t idx) const {
  const auto mm = m(idx);
  return {mm[0] * dxi, mm[1] * dxi, mm[2] * dxi};
}

bool XiLattice::on_line(std::size_t idx) const {
  const auto mm = m(idx);
  return mm[0] == 0 && mm[1] == 0;
}

std::size_t FourierSamples::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
}

std::size_t FourierSamples::measurable_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < lattice.count(); ++i) c += lattice.on_line(i) ? 0 : 1;
  return c;
}

// ---- synthesis ---------------------------------------------------------------------

namespace {

// Fill value at a missing lattice point from measured lateral neighbours:
// fourth order where two rings are present, otherwise second order.
template <class T, class Get>
std::optional<T> lateral_fill(const XiLattice& L, const std::vector<char>& ok, const std::array<int, 3>& m, Get get) {
  auto avail = [&](std::array<int, 3> q) { return L.contains(q) && ok[L.index(q)]; };
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<T> est;
    const std::array<int, 2> axes = pass == 0 ? std::array<int, 2>{0, 1} : std::array<int, 2>{2, 2};
    for (int a : axes) {
      if (pass == 1 && !est.empty()) break;
      std::array<int, 3> p1 = m, m1 = m, p2 = m, m2 = m;
      p1[a] += 1;
      m1[a] -= 1;
      p2[a] += 2;
      m2[a] -= 2;
      if (avail(p1) && avail(m1) && avail(p2) && avail(m2)) {
        T v = get(L.index(p1)) + get(L.index(m1));
        T w = get(L.index(p2)) + get(L.index(m2));
        est.push_back((4.0 * v - w) / 6.0);
      } else if (avail(p1) && avail(m1)) {
        est.push_back((get(L.index(p1)) + get(L.index(m1))) / 2.0);
      }
      if (pass == 1) break;
    }
    if (!est.empty()) {
      T acc = est[0];
      for (std::size_t i = 1; i < est.size(); ++i) acc = acc + est[i];
      return acc / static_cast<double>(est.size());
    }
  }
  // Nearest measured neighbour.
  for (int r = 1; r <= 2; ++r)
    for (int dz = -r; dz <= r; ++dz)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const std::array<int, 3> q{m[0] + dx, m[1] + dy, m[2] + dz};
          if (avail(q)) return get(L.index(q));
        }
  return std::nullopt;
}

struct C3 {
  CVec3 v{};
  C3 operator+(const C3& o) const { return {{v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}}; }
  C3 operator-(const C3& o) const { return {{v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}}; }
  C3 operator/(double s) const { return {{v[0] / s, v[1] / s, v[2] / s}}; }
  friend C3 operator*(double s, const C3& a) { return {{s * a.v[0], s * a.v[1], s * a.v[2]}}; }
};

template <class T, class Conj>
std::vector<T> fill_and_symmetrise(const XiLattice& L, const std::vector<char>& ok, const std::vector<T>& in,
                                   Conj conjf) {
  std::vector<T> out = in;
  std::vector<char> filled(L.count(), 0);
  for (std::size_t i = 0; i < L.count(); ++i) {
    if (ok[i]) continue;
    const auto f = lateral_fill<T>(L, ok, L.m(i), [&](std::size_t j) { return in[j]; });
    out[i] = f ? *f : T{};
    filled[i] = 1;
  }
  const std::vector<T> raw = out;
  for (std::size_t i = 0; i < L.count(); ++i) {
    if (!filled[i]) continue;
    auto m = L.m(i);
    const std::array<int, 3> mm{-m[0], -m[1], -m[2]};
    if (!L.contains(mm)) continue;
    out[i] = (raw[i] + conjf(raw[L.index(mm)])) / 2.0;
  }
  return out;
}

// (dxi / 2 pi)^3 sum_m c(m) b(x1, m1) b(x2, m2) b(x3, m3) with b = e^{-i x xi}
// and cos(x xi) on the unpaired lowest plane.
ScalarField synthesize(const XiLattice& L, const std::vector<cplx>& c, const Grid3& target) {
  const int n = L.n;
  std::array<std::vector<cplx>, 3> basis;
  for (int d = 0; d < 3; ++d) {
    basis[d].resize(static_cast<std::size_t>(target.n(d)) * n);
    for (int i = 0; i < target.n(d); ++i)
      for (int a = 0; a < n; ++a) {
        const int m = a + L.lo();
        const double x = target.coord(d, i);
        basis[d][static_cast<std::size_t>(i) * n + a] =
            (n % 2 == 0 && m == L.lo()) ? cplx(std::cos(x * m * L.dxi)) : std::exp(-kI * x * (m * L.dxi));
      }
  }
  const int n0 = target.n(0), n1 = target.n(1), n2 = target.n(2);
  // Transform axis 0, then 1, then 2.
  std::vector<cplx> t0(static_cast<std::size_t>(n0) * n * n, 0.0);
  for (int c2 = 0; c2 < n; ++c2)
    for (int c1 = 0; c1 < n; ++c1)
      for (int i = 0; i < n0; ++i) {
        cplx acc = 0.0;
        for (int a = 0; a < n; ++a)
          acc += basis[0][static_cast<std::size_t>(i) * n + a] *
                 c[static_cast<std::size_t>(a) + static_cast<std::size_t>(n) * (c1 + static_cast<std::size_t>(n) * c2)];
        t0[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0) * (c1 + static_cast<std::size_t>(n) * c2)] = acc;
      }
  std::vector<cplx> t1(static_cast<std::size_t>(n0) * n1 * n, 0.0);
  for (int c2 = 0; c2 < n; ++c2)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i) {
        cplx acc = 0.0;
        for (int a = 0; a < n; ++a)
          acc += basis[1][static_cast<std::size_t>(j) * n + a] *
                 t0[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0) * (a + static_cast<std::size_t>(n) * c2)];
        t1[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0) * (j + static_cast<std::size_t>(n1) * c2)] = acc;
      }
  ScalarField out(target);
  const double norm3 = std::pow(L.dxi / (2.0 * kPi), 3);
  for (int kk = 0; kk < n2; ++kk)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i) {
        cplx acc = 0.0;
        for (int a = 0; a < n; ++a)
          acc += basis[2][static_cast<std::size_t>(kk) * n + a] *
                 t1[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0) * (j + static_cast<std::size_t>(n1) * a)];
        out(i, j, kk) = norm3 * acc;
      }
  return out;
}

void check_quality(const FourierSamples& s) {
  const double frac = static_cast<double>(s.flagged_count()) / std::max<std::size_t>(1, s.measurable_count());
  if (frac > kMaxFlaggedFraction) {
    std::ostringstream os;
    os << "reconstruction: " << s.flagged_count() << " of " << s.measurable_count()
       << " lattice points flagged (limit " << kMaxFlaggedFraction * 100 << "%)";
    throw QualityError(os.str());
  }
}

}  // namespace

std::vector<CVec3> curl_spectrum(const FourierSamples& s) {
  const XiLattice& L = s.lattice;
  if (s.scalar) throw ArgumentError("curl_spectrum: samples are scalar");
  std::vector<C3> c(L.count());
  for (std::size_t i = 0; i < L.count(); ++i) {
    if (!s.measured[i]) continue;
    const Vec3 xi = L.xi(i);
    const CVec3 x = cross(xi, s.v[i]);
    c[i].v = {-kI * x[0], -kI * x[1], -kI * x[2]};
  }
  const auto f = fill_and_symmetrise<C3>(L, s.measured, c, [](const C3& a) { return C3{conj(a.v)}; });
  std::vector<CVec3> out(L.count());
  for (std::size_t i = 0; i < L.count(); ++i) out[i] = f[i].v;
  return out;
}

VectorField3 recover_curl(const FourierSamples& s, const Grid3& target) {
  check_quality(s);
  const std::vector<CVec3> c = curl_spectrum(s);
  VectorField3 out(target, false);
  for (int d = 0; d < 3; ++d) {
    std::vector<cplx> comp(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) comp[i] = c[i][d];
    out.c[d] = synthesize(s.lattice, comp, target).v;
  }
  return out;
}

ScalarField recover_q(const FourierSamples& s, const Grid3& target) {
  if (!s.scalar) throw ArgumentError("recover_q: samples are not scalar");
  check_quality(s);
  const auto f = fill_and_symmetrise<cplx>(s.lattice, s.measured, s.s, [](cplx a) { return std::conj(a); });
  return synthesize(s.lattice, f, target);
}

VectorField3 difference_curl(const ProblemSetup& s) { return curl(s.A2 - s.A1); }

double relative_l2(const ScalarField& a, const ScalarField& ref, const IndexBox& region) {
  require_same_grid(a.grid, ref.grid, "relative_l2");
  const double den = l2_norm(ref, region);
  const double num = l2_norm(a - ref, region);
  return den > 0.0 ? num / den : num;
}

double relative_l2(const VectorField3& a, const VectorField3& ref, const IndexBox& region) {
  require_same_grid(a.grid, ref.grid, "relative_l2");
  const double den = l2_norm(ref, region);
  const double num = l2_norm(a - ref, region);
  return den > 0.0 ? num / den : num;
}

}  // namespace cgoh
