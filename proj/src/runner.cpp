#include "cgoh/runner.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "cgoh/dbar.hpp"
#include "cgoh/diagnostics.hpp"

namespace cgoh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void note(const RunContext& ctx, const std::string& suite, const std::string& msg) {
  if (ctx.log) *ctx.log << "[" << suite << "] " << msg << std::endl;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Vec3 random_unit(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double n = norm(v);
    if (n > 0.2 && n <= 1.0) return scale(v, 1.0 / n);
  }
}

Vec3 random_vec(Rng& rng, double lo, double hi) { return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)}; }

IndexBox lower_half_region(const Grid3& g) {
  IndexBox b = g.all();
  b.hi[2] = g.plane_row();
  return b;
}

std::uint64_t suite_seed(const Scenario& s, std::uint64_t salt) { return s.seed * 0x9E3779B97F4A7C15ull + salt; }

// ---- dbar --------------------------------------------------------------------------

SuiteResult suite_dbar(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "dbar";
  Rng rng(suite_seed(s, 1));
  const int nf = s.dbar_n, nc = s.dbar_n / 2;
  Table t{"inversion", {"field", "error_fine", "error_coarse", "order"}, {}, "field", "error_fine", false, true};
  double worst = 0.0, min_order = std::numeric_limits<double>::infinity();
  for (int f = 0; f < s.dbar_fields; ++f) {
    std::vector<std::pair<Bump, cplx>> bumps;
    const int nb = 1 + static_cast<int>(rng.uniform() * 3.0);
    for (int b = 0; b < nb; ++b) {
      Bump bump;
      bump.center = {rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), 0.0};
      bump.sigma = rng.uniform(0.18, 0.24);
      bump.radius = 0.7;
      bump.taper = 0.4;
      bumps.push_back({bump, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1))});
    }
    auto fn = [&](cplx z) {
      cplx acc = 0.0;
      for (const auto& [b, a] : bumps) acc += a * b.value({z.real(), z.imag(), 0.0});
      return acc;
    };
    double err[2], spacing[2];
    const int ns[2] = {nf, nc};
    for (int r = 0; r < 2; ++r) {
      const Grid2 g({-1.0, -1.0}, {1.0, 1.0}, {ns[r], ns[r]});
      const PlaneField data = sample_plane(g, fn);
      const PlaneField back = dbar_apply(cauchy_transform(data));
      PlaneField diff(g);
      for (std::size_t n = 0; n < g.size(); ++n) diff.v[n] = back.v[n] - data.v[n];
      err[r] = l2_norm(diff) / l2_norm(data);
      spacing[r] = g.d[0];
    }
    const double order = std::log(err[1] / err[0]) / std::log(spacing[1] / spacing[0]);
    worst = std::max(worst, err[0]);
    min_order = std::min(min_order, order);
    t.rows.push_back({double(f), err[0], err[1], order});
  }
  note(ctx, "dbar", "worst error " + format_number(worst) + ", smallest order " + format_number(min_order));
  out.criteria.push_back(Criterion::check("dbar.inversion_error",
                                          "relative L2 error of dbar(cauchy(f)) - f at the fine grid, worst field",
                                          worst, Compare::AtMost, 1e-3));
  out.criteria.push_back(Criterion::check("dbar.order", "observed order under one refinement, smallest over fields",
                                          min_order, Compare::AtLeast, 1.8));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- contour (holomorphic extension on slices of a gauge pair) -------------------------

SuiteResult suite_contour(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "contour";
  std::vector<BumpSpec> psi = s.gauge.bumps;
  if (psi.empty()) {
    BumpSpec b;
    b.center = {0.05, -0.05, -0.9};
    b.amplitude = {0.8, 0.0, 0.0};
    psi.push_back(b);
  }
  std::vector<Bump> shapes;
  double reach = 0.0;
  Vec3 centre{};
  for (const auto& b : psi) {
    shapes.push_back(Bump{b.center, b.sigma, b.radius, b.taper});
    centre = add(centre, scale(b.center, 1.0 / psi.size()));
  }
  for (const auto& b : psi) reach = std::max(reach, norm(sub(b.center, centre)) + b.radius);
  auto grad_psi = [&](const Vec3& x) {
    Vec3 g{};
    for (std::size_t i = 0; i < shapes.size(); ++i) g = add(g, scale(shapes[i].gradient(x), psi[i].amplitude[0]));
    return g;
  };
  const GammaPair gp = choose_gammas({1.0, 2.0, 1.0});
  const Frame frame = Frame::from(gp.gamma1, gp.gamma2);
  const Vec3 c = frame.to_frame(centre);
  const double R = reach + 0.15;  // contour radius, outside the support on every slice
  const int samples = 512;
  const double half = R + 0.25;
  const int n = 193;

  Table t{"slices", {"slice", "y3", "int_1", "int_z", "int_z2", "winding", "log_error"}, {}, "", "", false, false};
  double worst_int = 0.0, worst_log = 0.0;
  int worst_winding = 0;
  for (int sl = 0; sl < s.contour_slices; ++sl) {
    const double frac = s.contour_slices == 1 ? 0.0 : -0.5 + double(sl) / (s.contour_slices - 1);
    const double y3 = c[2] + frac * reach;
    const Grid2 g({c[0] - half, c[1] - half}, {c[0] + half, c[1] + half}, {n, n});
    // dbar Psi = i dbar psi on the slice, Psi = i psi; the contour only sees
    // the exterior values.
    const PlaneField src = sample_plane(g, [&](cplx z) {
      const Vec3 gr = grad_psi(frame.from_frame({z.real(), z.imag(), y3}));
      return 0.5 * kI * (dot(frame.alpha, gr) + kI * dot(frame.beta, gr));
    });
    const Contour C = circle(cplx(c[0], c[1]), R, samples);
    std::vector<cplx> psi_c(C.z.size(), 0.0), e_psi(C.z.size());
    const double area = g.d[0] * g.d[1];
    for (std::size_t q = 0; q < g.size(); ++q) {
      if (src.v[q] == 0.0) continue;
      const cplx w = g.node(static_cast<int>(q % g.n[0]), static_cast<int>(q / g.n[0]));
      for (std::size_t j = 0; j < C.z.size(); ++j) {
        const cplx d = C.z[j] - w;
        psi_c[j] += src.v[q] * area * cauchy_kernel_cell_average(d.real(), d.imag(), g.d[0], g.d[1]);
      }
    }
    for (std::size_t j = 0; j < C.z.size(); ++j) e_psi[j] = std::exp(psi_c[j]);
    std::array<double, 3> ints{};
    for (int p = 0; p < 3; ++p) {
      std::vector<cplx> v(C.z.size());
      for (std::size_t j = 0; j < C.z.size(); ++j) v[j] = std::pow(C.z[j], p) * e_psi[j];
      ints[static_cast<std::size_t>(p)] = std::abs(contour_integral(C, v));
      worst_int = std::max(worst_int, ints[static_cast<std::size_t>(p)]);
    }
    Contour path;
    path.z = e_psi;
    path.closed = true;
    const int wn = winding_number(path);
    if (std::abs(wn) > std::abs(worst_winding)) worst_winding = wn;

    // F = Cauchy integral of the boundary values inside; log F must reproduce
    // Psi on the contour.
    const double inner = R - 3.0 * C.mesh();
    PlaneField F(g, 1.0);
    std::vector<char> mask(g.size(), 0);
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const cplx z = g.node(i, j);
        const cplx rel = z - cplx(c[0], c[1]);
        if (std::abs(rel) >= inner) continue;
        mask[g.index(i, j)] = 1;
        F(i, j) = plemelj_interior(C, e_psi, z);
        const double score = rel.real() - 4.0 * std::abs(rel.imag());
        if (score > best) {
          best = score;
          bi = i;
          bj = j;
        }
      }
    const cplx w0 = psi_c[0] + std::log(F(bi, bj) / e_psi[0]);
    const PlaneField L = holomorphic_log(F, mask, bi, bj, w0);
    double log_err = 0.0;
    for (std::size_t j = 0; j < C.z.size(); ++j) {
      const cplx target = cplx(c[0], c[1]) + (C.z[j] - cplx(c[0], c[1])) * (inner - 0.5 * g.d[0]) / R;
      const int i = std::clamp(static_cast<int>(std::lround((target.real() - g.lo[0]) / g.d[0])), 0, g.n[0] - 1);
      const int k = std::clamp(static_cast<int>(std::lround((target.imag() - g.lo[1]) / g.d[1])), 0, g.n[1] - 1);
      if (!mask[g.index(i, k)]) continue;
      log_err = std::max(log_err, std::abs(L(i, k) - psi_c[j]));
    }
    worst_log = std::max(worst_log, log_err);
    t.rows.push_back({double(sl), y3, ints[0], ints[1], ints[2], double(wn), log_err});
  }
  note(ctx, "contour", "worst moment " + format_number(worst_int) + ", worst log error " + format_number(worst_log));
  out.criteria.push_back(Criterion::check("contour.moments",
                                          "largest |closed integral of g exp(Psi) dz|, g in {1, z, z^2}, over slices",
                                          worst_int, Compare::AtMost, 1e-6));
  out.criteria.push_back(Criterion::check("contour.winding", "winding number of exp(Psi) along the contour",
                                          double(worst_winding), Compare::Equal, 0.0));
  out.criteria.push_back(Criterion::check("contour.log", "largest |log F - Psi| at the contour", worst_log,
                                          Compare::AtMost, 1e-6));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- transport ----------------------------------------------------------------------

SuiteResult suite_transport(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "transport";
  Rng rng(suite_seed(s, 2));
  const Grid3 g(Box3{{-1.7, -1.7, -1.7}, {1.7, 1.7, 1.7}}, s.transport_n);
  Table t{"phases", {"potential", "h", "epsilon", "residual", "sup_phi_h_minus_phi0"}, {}, "h", "sup_phi_h_minus_phi0",
          true, true};
  double worst = 0.0;
  int monotone = 1;
  for (int p = 0; p < s.transport_potentials; ++p) {
    BumpSpec b;
    b.center = random_vec(rng, -0.2, 0.2);
    b.sigma = rng.uniform(0.2, 0.26);
    b.radius = 0.75;
    b.taper = 0.5;
    b.amplitude = random_vec(rng, -1.0, 1.0);
    const VectorField3 A = sample_vector_bumps(g, {b}, false);
    const Vec3 a = random_unit(rng);
    Vec3 v = random_unit(rng);
    v = sub(v, scale(a, dot(a, v)));
    const Frame frame = Frame::from(a, scale(v, 1.0 / norm(v)));
    const CVec3 w = frame.zeta0();
    const ScalarField phi0 = phase_limit(A, w, frame);
    double prev = std::numeric_limits<double>::infinity();
    for (double h : s.h_sequence) {
      const double eps = std::cbrt(h);
      const VectorField3 As = mollify(A, eps).sharp;
      const ScalarField phi = solve_transport_phase(As, w, frame);
      const double res = transport_residual(phi, As, w);
      const double d = sup_norm(phi - phi0);
      worst = std::max(worst, res);
      if (!(d < prev)) monotone = 0;
      prev = d;
      t.rows.push_back({double(p), h, eps, res, d});
    }
    note(ctx, "transport", "potential " + std::to_string(p) + " done");
  }
  out.criteria.push_back(Criterion::check("transport.residual",
                                          "relative residual of zeta0.grad Phi + i zeta0.A_sharp, worst over potentials and h",
                                          worst, Compare::AtMost, 5e-3));
  out.criteria.push_back(Criterion::check("transport.monotone", "sup |Phi_h - Phi0| strictly decreasing in h (1 = yes)",
                                          double(monotone), Compare::Equal, 1.0));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- cgo rates -------------------------------------------------------------------------

SuiteResult suite_cgo(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "cgo";
  const double L = 1.15;
  const Grid3 g(Box3{{-L, -L, -L}, {L, L, L}}, s.cgo_n);
  BumpSpec ab;
  ab.center = {0.05, -0.05, 0.0};
  ab.sigma = 0.3;
  ab.radius = 0.55;
  ab.taper = 0.6;
  ab.amplitude = {1.0, -0.5, 0.7};
  BumpSpec qb = ab;
  qb.center = {0.0, 0.0, 0.0};
  qb.amplitude = {2.0, 0.0, 0.0};
  const VectorField3 A = sample_vector_bumps(g, {ab}, false);
  const ScalarField q = sample_scalar_bumps(g, {qb}, false);
  const IndexBox omega = g.nodes_in(Box3{{-0.6, -0.6, -0.6}, {0.6, 0.6, 0.6}});
  Table t{"rates", {"h", "sup_L_zeta_a", "r_h1_scl", "solve_residual"}, {}, "h", "sup_L_zeta_a", true, true};
  std::vector<double> hs, la, rn;
  for (double h : s.h_sequence) {
    if (h > 0.125) continue;  // h^(1/3) mollification would reach the faces
    const CgoParams p = CgoParams::make(h, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0});
    const CgoSpec spec = p.first();
    const Mollified M = mollify(A, p.epsilon);
    const ScalarField a = build_amplitude(solve_transport_phase(M.sharp, spec.zeta0, spec.frame));
    const double res = conjugated_residual(a, spec, A, M.sharp, q, s.k, omega).sup;
    const RemainderResult r = solve_remainder(a, spec, A, M.sharp, q, s.k);
    const double h1 = norms(r.r, h, omega).h1_scl;
    hs.push_back(h);
    la.push_back(res);
    rn.push_back(h1);
    t.rows.push_back({h, res, h1, r.relative_residual});
    note(ctx, "cgo", "h = " + format_number(h) + ": sup L a " + format_number(res) + ", |r| " + format_number(h1));
  }
  out.criteria.push_back(Criterion::check("cgo.amplitude_rate", "log-log slope of sup |L_zeta a| on the interior region",
                                          loglog_slope(hs, la), Compare::AtLeast, 1.2));
  out.criteria.push_back(Criterion::check("cgo.remainder_rate", "log-log slope of the semiclassical H1 norm of r",
                                          loglog_slope(hs, rn), Compare::AtLeast, 0.25));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- gauge ---------------------------------------------------------------------------

struct GaugeTrial {
  BumpSpec A, q, psi;
  Vec3 c;
};

double top_face_relative(const PlaneField& a, const PlaneField& b) {
  PlaneField d(a.grid);
  for (std::size_t n = 0; n < d.v.size(); ++n) d.v[n] = a.v[n] - b.v[n];
  return l2_norm(d) / l2_norm(b);
}

SuiteResult suite_gauge(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "gauge";
  Rng rng(suite_seed(s, 3));
  const Box3 box{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  const int nf = s.gauge_n, nc = (s.gauge_n + 1) / 2;
  {
    const FacePatch& p = s.gamma2;
    if (p.i1 >= nf || p.j1 >= nf || s.gamma1.i1 >= nf || s.gamma1.j1 >= nf)
      throw InputError("scenario key 'gamma.patch2': patch exceeds the gauge grid top face");
  }
  // Dirichlet datum on the top face: a bump filling the gamma2 patch, given
  // in coordinates so that both resolutions see the same function.
  const Grid3 gf(box, nf);
  const double x0 = gf.coord(0, s.gamma2.i0), x1 = gf.coord(0, s.gamma2.i1);
  const double y0 = gf.coord(1, s.gamma2.j0), y1 = gf.coord(1, s.gamma2.j1);
  const Bump fbump{{0.5 * (x0 + x1), 0.5 * (y0 + y1), 0.0}, 0.2 * std::min(x1 - x0, y1 - y0),
                   0.5 * std::min(x1 - x0, y1 - y0), 0.5};

  Table t{"trials", {"trial", "n", "discrepancy", "discrepancy_gamma1", "truncation_error"}, {}, "", "", false, false};
  double worst_ratio = 0.0, min_order = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < s.gauge_trials; ++trial) {
    BumpSpec A, q, psi;
    A.center = random_vec(rng, -0.1, 0.1);
    A.sigma = rng.uniform(0.3, 0.4);
    A.radius = 0.85;
    A.amplitude = random_vec(rng, -1.0, 1.0);
    q.center = random_vec(rng, -0.1, 0.1);
    q.sigma = rng.uniform(0.3, 0.4);
    q.radius = 0.85;
    q.amplitude = {rng.uniform(-1.0, 1.0), -rng.uniform(0.0, 0.5), 0.0};
    psi.center = random_vec(rng, -0.1, 0.1);
    psi.sigma = rng.uniform(0.3, 0.4);
    psi.radius = 0.85;
    psi.amplitude = {rng.uniform(0.5, 1.5), 0.0, 0.0};
    Vec3 c = random_unit(rng);
    c = scale(c, rng.uniform(0.5, 1.5));
    double disc[2] = {0, 0}, spacing[2] = {0, 0}, trunc = 0.0;
    const int ns[2] = {nf, nc};
    for (int r = 0; r < 2; ++r) {
      const Grid3 g(box, ns[r]);
      const VectorField3 Av = sample_vector_bumps(g, {A}, false);
      const ScalarField qv = sample_scalar_bumps(g, {q}, false);
      const ScalarField pv = sample_scalar_bumps(g, {psi}, false);
      const PlaneField f = sample_plane(top_face(g), [&](cplx z) { return fbump.value({z.real(), z.imag(), 0.0}); });
      const GaugeCheck gc = gauge_check(Av, qv, s.k, pv, f, BoundaryKind::Dirichlet);
      disc[r] = gc.discrepancy;
      spacing[r] = g.h(0);
      double d1 = 0.0;
      if (r == 0) {
        PlaneField a(gc.lhs.grid), b(gc.rhs.grid);
        for (int j = s.gamma1.j0; j <= s.gamma1.j1; ++j)
          for (int i = s.gamma1.i0; i <= s.gamma1.i1; ++i) {
            a(i, j) = gc.lhs(i, j);
            b(i, j) = gc.rhs(i, j);
          }
        d1 = top_face_relative(a, b);
        // Manufactured plane wave u = exp(i c.x) with the same A, q.
        Bump ab{A.center, A.sigma, A.radius, A.taper};
        const ScalarField u = sample(g, [&](const Vec3& x) { return std::exp(kI * dot(c, x)); });
        const ScalarField forcing = sample(g, [&](const Vec3& x) {
          const double bv = ab.value(x);
          const Vec3 Ax = scale(A.amplitude, bv);
          const double divA = dot(A.amplitude, ab.gradient(x));
          const cplx qx = cplx(q.amplitude[0], q.amplitude[1]) * Bump{q.center, q.sigma, q.radius, q.taper}.value(x);
          return (dot(c, c) + 2.0 * dot(Ax, c) - kI * divA + dot(Ax, Ax) + qx - s.k * s.k) * std::exp(kI * dot(c, x));
        });
        const DiscreteOperator op(Av, qv, s.k, BoundaryKind::Dirichlet);
        const ScalarField uh = op.solve(u, &forcing);
        const PlaneField th = conormal_trace(uh, Av);
        const int top = g.n(2) - 1;
        const PlaneField te = sample_plane(top_face(g), [&](cplx z) {
          const Vec3 x{z.real(), z.imag(), g.coord(2, top)};
          const double A3 = A.amplitude[2] * ab.value(x);
          return (kI * c[2] + kI * A3) * std::exp(kI * dot(c, x));
        });
        trunc = top_face_relative(th, te);
      }
      t.rows.push_back({double(trial), double(ns[r]), disc[r], d1, r == 0 ? trunc : 0.0});
    }
    const double order = std::log(disc[1] / disc[0]) / std::log(spacing[1] / spacing[0]);
    worst_ratio = std::max(worst_ratio, disc[0] / trunc);
    min_order = std::min(min_order, order);
    note(ctx, "gauge", "trial " + std::to_string(trial) + ": discrepancy " + format_number(disc[0]) +
                           ", truncation " + format_number(trunc) + ", order " + format_number(order));
  }
  out.criteria.push_back(Criterion::check("gauge.vs_truncation",
                                          "gauge discrepancy over manufactured-solution truncation error, worst trial",
                                          worst_ratio, Compare::AtMost, 10.0));
  out.criteria.push_back(Criterion::check("gauge.order", "observed order of the gauge discrepancy, smallest over trials",
                                          min_order, Compare::AtLeast, 1.8));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- greens --------------------------------------------------------------------------

SuiteResult suite_greens(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "greens";
  Rng rng(suite_seed(s, 4));
  const Box3 box{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  const int nf = s.greens_n, nc = (s.greens_n + 1) / 2;
  Table t{"trials", {"trial", "residual_fine", "residual_coarse", "order", "control", "control_ratio"}, {}, "", "", false,
          false};
  double min_order = std::numeric_limits<double>::infinity(), min_ratio = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int trial = 0; trial < s.greens_trials; ++trial) {
    BumpSpec A, q, bu, bv;
    A.center = random_vec(rng, -0.2, 0.2);
    A.sigma = rng.uniform(0.3, 0.4);
    A.radius = 5.0;
    A.amplitude = random_vec(rng, -1.0, 1.0);
    q.center = random_vec(rng, -0.2, 0.2);
    q.sigma = rng.uniform(0.3, 0.4);
    q.radius = 5.0;
    q.amplitude = {rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0), 0.0};
    const Vec3 cu = scale(random_unit(rng), rng.uniform(0.5, 1.5));
    const Vec3 cv = scale(random_unit(rng), rng.uniform(0.5, 1.5));
    bu.center = random_vec(rng, -0.3, 0.3);
    bu.sigma = 0.4;
    bu.radius = 5.0;
    bu.amplitude = {0.5, 0.0, 0.0};
    bv = bu;
    bv.center = random_vec(rng, -0.3, 0.3);
    double res[2], spacing[2], control = 0.0;
    const int ns[2] = {nf, nc};
    for (int r = 0; r < 2; ++r) {
      const Grid3 g(box, ns[r]);
      const VectorField3 Av = sample_vector_bumps(g, {A}, false);
      const ScalarField qv = sample_scalar_bumps(g, {q}, false);
      const Bump su{bu.center, bu.sigma, bu.radius, bu.taper}, sv{bv.center, bv.sigma, bv.radius, bv.taper};
      const ScalarField u = sample(g, [&](const Vec3& x) { return std::exp(kI * dot(cu, x)) * (1.0 + 0.5 * su.value(x)); });
      const ScalarField v = sample(g, [&](const Vec3& x) { return std::exp(kI * dot(cv, x)) * (1.0 + 0.5 * sv.value(x)); });
      res[r] = greens_residual(u, v, Av, qv, true);
      spacing[r] = g.h(0);
      if (r == 0) control = greens_residual(u, v, Av, qv, false);
    }
    const double order = std::log(res[1] / res[0]) / std::log(spacing[1] / spacing[0]);
    min_order = std::min(min_order, order);
    worst = std::max(worst, res[0]);
    const double ratio = control / res[0];
    min_ratio = std::min(min_ratio, ratio);
    t.rows.push_back({double(trial), res[0], res[1], order, control, ratio});
    note(ctx, "greens", "trial " + std::to_string(trial) + ": residual " + format_number(res[0]) + ", order " +
                            format_number(order) + ", control " + format_number(control));
  }
  out.summary["worst_residual"] = worst;
  out.criteria.push_back(Criterion::check("greens.order", "observed order of the Green residual, smallest over trials",
                                          min_order, Compare::AtLeast, 1.8));
  out.criteria.push_back(Criterion::check("greens.control",
                                          "negative control (q in place of conj q) over the Green residual, smallest",
                                          min_ratio, Compare::AtLeast, 100.0));
  out.tables.push_back(std::move(t));
  return out;
}

// ---- identity ------------------------------------------------------------------------

const std::vector<std::array<int, 3>> kIdentityPoints{{1, 0, 0}, {1, 1, 1}, {2, -1, 3}, {6, -5, 2}};

SuiteResult suite_identity(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "identity";
  const ProblemSetup setup = build_setup(s);
  const XiLattice L = s.lattice();
  const LimitOptions lo = s.limit_options();

  // Identical potentials: both integrals vanish.
  ProblemSetup same{setup.A1, setup.A1, setup.q1, setup.q1, setup.k};
  double zero = 0.0;
  for (const auto& m : kIdentityPoints) {
    const Vec3 xi{m[0] * L.dxi, m[1] * L.dxi, m[2] * L.dxi};
    const GammaPair gp = choose_gammas(xi);
    for (double h : limit_h_values(lo, xi)) {
      const IdentityTerms t = cgo_pair_integral(same, CgoParams::make(h, xi, gp.gamma1, gp.gamma2));
      zero = std::max({zero, std::abs(t.magnetic_term), std::abs(t.zero_order_term)});
    }
  }
  out.criteria.push_back(Criterion::check("identity.identical_potentials",
                                          "largest |integral| of either identity term with identical potentials", zero,
                                          Compare::AtMost, 1e-10));

  // Genuine pair: limits against direct quadrature.
  Table t{"limits", {"m1", "m2", "m3", "kind", "sign", "h", "re_value", "im_value", "cross_terms"}, {}, "", "", false,
          false};
  Table lim{"summary", {"m1", "m2", "m3", "kind", "sign", "discrepancy", "strip_check"}, {}, "", "", false, false};
  const Workspace ws = Workspace::make(setup);
  double worst = 0.0, worst_strip = 0.0;
  const ProblemSetup common{setup.A1, setup.A1, setup.q1, setup.q2, setup.k};
  const Workspace wsq = Workspace::make(common);
  const VectorField3 dA_full = setup.A2 - setup.A1;
  const ScalarField dq_full = setup.q1 - setup.q2;
  for (const auto& m : kIdentityPoints) {
    const Vec3 xi{m[0] * L.dxi, m[1] * L.dxi, m[2] * L.dxi};
    for (int kind = 0; kind < 2; ++kind) {
      for (int sign : {1, -1}) {
        if (kind == 1 && sign == -1) continue;
        LimitOptions o = lo;
        o.tolerance = std::numeric_limits<double>::infinity();
        const IdentityKind k = kind == 0 ? IdentityKind::Magnetic : IdentityKind::Electric;
        const LimitResult r = limit_identity(kind == 0 ? setup : common, xi, sign, k, o);
        for (const auto& row : r.table)
          t.rows.push_back({double(m[0]), double(m[1]), double(m[2]), double(kind), double(sign), row.h,
                            row.value.real(), row.value.imag(),
                            std::abs(row.pair_terms[1]) + std::abs(row.pair_terms[2])});
        // The weight cancels against exp(Psi0): compare with the plain
        // transform of the difference over the whole setup grid.
        GammaPair gp = choose_gammas(xi);
        gp.gamma2 = scale(gp.gamma2, sign);
        const CVec3 w = complexify(gp.gamma1, gp.gamma2);
        const cplx plain = kind == 0 ? dot(w, fourier_sample(dA_full, xi)) : fourier_sample(dq_full, xi);
        const double scale_ = kind == 0 ? ws.scale_A : wsq.scale_q;
        const double strip = std::abs(r.direct - plain) / scale_;
        worst = std::max(worst, r.discrepancy);
        worst_strip = std::max(worst_strip, strip);
        lim.rows.push_back({double(m[0]), double(m[1]), double(m[2]), double(kind), double(sign), r.discrepancy, strip});
      }
    }
    note(ctx, "identity", "xi point done");
  }
  out.criteria.push_back(Criterion::check("identity.limit_vs_direct",
                                          "largest relative gap between extrapolated limit and direct quadrature",
                                          worst, Compare::AtMost, s.limit_tolerance));
  out.criteria.push_back(Criterion::check("identity.strip", "weighted direct quadrature against the plain transform",
                                          worst_strip, Compare::AtMost, 1e-3));

  // One point with the remainder correction switched on.
  {
    const auto& m = kIdentityPoints[1];
    const Vec3 xi{m[0] * L.dxi, m[1] * L.dxi, m[2] * L.dxi};
    LimitOptions o = lo;
    o.tolerance = std::numeric_limits<double>::infinity();
    const LimitResult a = limit_identity(setup, xi, 1, IdentityKind::Magnetic, o);
    o.pair.with_remainder = true;
    const LimitResult b = limit_identity(setup, xi, 1, IdentityKind::Magnetic, o);
    const double shift = std::abs(a.extrapolated - b.extrapolated) / ws.scale_A;
    out.summary["remainder_shift"] = shift;
    out.summary["remainder_discrepancy"] = b.discrepancy;
    out.criteria.push_back(Criterion::check("identity.remainder",
                                            "limit with the remainder correction against direct quadrature",
                                            b.discrepancy, Compare::AtMost, s.limit_tolerance));
    note(ctx, "identity", "remainder shift " + format_number(shift));
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(lim));
  return out;
}

// ---- reconstruction ---------------------------------------------------------------------

Table sample_table(const FourierSamples& fs) {
  Table t{"samples", {"m1", "m2", "m3", "flagged", "discrepancy_plus", "discrepancy_minus", "re_plus", "im_plus",
                      "re_direct_plus", "im_direct_plus"},
          {}, "", "", false, false};
  for (std::size_t i = 0; i < fs.lattice.count(); ++i) {
    if (fs.lattice.on_line(i)) continue;
    const auto m = fs.lattice.m(i);
    const SamplePoint& p = fs.points[i];
    t.rows.push_back({double(m[0]), double(m[1]), double(m[2]), double(fs.flagged[i]), p.discrepancy[0],
                      p.discrepancy[1], p.extrapolated[0].real(), p.extrapolated[0].imag(), p.direct[0].real(),
                      p.direct[0].imag()});
  }
  return t;
}

double max_discrepancy(const FourierSamples& fs) {
  double m = 0.0;
  for (std::size_t i = 0; i < fs.points.size(); ++i)
    if (fs.points[i].failure.empty() || fs.points[i].failure.rfind("convergence", 0) == 0)
      for (double d : fs.points[i].discrepancy) m = std::max(m, d);
  return m;
}

std::function<void(std::size_t, std::size_t)> progress(const RunContext& ctx, const std::string& suite) {
  return [&ctx, suite](std::size_t done, std::size_t total) {
    if (done % 100 == 0 || done == total)
      note(ctx, suite, std::to_string(done) + " / " + std::to_string(total) + " direction classes");
  };
}

void add_flag_criterion(SuiteResult& out, const FourierSamples& fs) {
  const double frac = double(fs.flagged_count()) / double(std::max<std::size_t>(1, fs.measurable_count()));
  Criterion c = Criterion::check(out.suite + ".flagged_fraction", "fraction of lattice points flagged", frac,
                                 Compare::AtMost, kMaxFlaggedFraction);
  nlohmann::json flagged = nlohmann::json::array();
  for (std::size_t i = 0; i < fs.points.size(); ++i)
    if (fs.flagged[i]) {
      const auto m = fs.lattice.m(i);
      flagged.push_back({{"m", {m[0], m[1], m[2]}}, {"failure", fs.points[i].failure}});
    }
  c.detail["flagged"] = flagged;
  out.criteria.push_back(c);
}

SuiteResult suite_curl(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "curl";
  const ProblemSetup setup = build_setup(s);
  PipelineOptions po;
  po.limit = s.limit_options();
  po.jobs = ctx.jobs;
  po.progress = progress(ctx, "curl");
  const FourierSamples fs = fourier_samples_A(setup, s.lattice(), po);
  add_flag_criterion(out, fs);
  out.criteria.push_back(Criterion::check("curl.limit_vs_direct",
                                          "largest relative gap between pipeline value and direct quadrature",
                                          max_discrepancy(fs), Compare::AtMost, s.limit_tolerance));
  out.tables.push_back(sample_table(fs));
  const Grid3& g = setup.grid();
  const IndexBox low = lower_half_region(g);
  const VectorField3 truth = difference_curl(setup);
  try {
    const VectorField3 rec = recover_curl(fs, g);
    if (!s.gauge.empty()) {
      const double rel = l2_norm(rec, low) / l2_norm(curl(setup.A1), low);
      out.criteria.push_back(Criterion::check("curl.gauge_null",
                                              "recovered curl norm relative to the curl of A1 (gauge pair)", rel,
                                              Compare::AtMost, 0.05));
    } else {
      out.criteria.push_back(Criterion::check("curl.error", "relative L2 error of the recovered curl on the lower half",
                                              relative_l2(rec, truth, low), Compare::AtMost, 0.15));
    }
    // Components along xi are outside the data; adding them must not move
    // the result.
    FourierSamples noisy = fs;
    Rng rng(suite_seed(s, 9));
    for (std::size_t i = 0; i < noisy.v.size(); ++i) {
      if (!noisy.measured[i]) continue;
      const Vec3 xi = noisy.lattice.xi(i);
      const cplx c(rng.uniform(-1, 1), rng.uniform(-1, 1));
      for (int d = 0; d < 3; ++d) noisy.v[i][d] += c * (xi[d] / norm(xi));
    }
    const VectorField3 rec2 = recover_curl(noisy, g);
    out.criteria.push_back(Criterion::check("curl.null_space",
                                            "relative change of the recovered curl after adding xi-parallel components",
                                            relative_l2(rec2, rec, g.all()), Compare::AtMost, 1e-12));
    out.fields.push_back({"recovered", "recovered curl of A2 - A1", rec});
  } catch (const QualityError& e) {
    out.criteria.push_back(Criterion::check("curl.quality", e.what(), 1.0, Compare::Equal, 0.0));
  }
  out.fields.push_back({"truth", "discrete curl of A2 - A1", truth});
  out.summary["flagged"] = fs.flagged_count();
  out.summary["measurable"] = fs.measurable_count();
  return out;
}

SuiteResult suite_q(const Scenario& s, const RunContext& ctx) {
  SuiteResult out;
  out.suite = "q";
  const ProblemSetup setup = build_setup(s, true);
  PipelineOptions po;
  po.limit = s.limit_options();
  po.jobs = ctx.jobs;
  po.progress = progress(ctx, "q");
  const FourierSamples fs = fourier_samples_q(setup, s.lattice(), po);
  add_flag_criterion(out, fs);
  out.criteria.push_back(Criterion::check("q.limit_vs_direct",
                                          "largest relative gap between pipeline value and direct quadrature",
                                          max_discrepancy(fs), Compare::AtMost, s.limit_tolerance));
  out.tables.push_back(sample_table(fs));
  const Grid3& g = setup.grid();
  const ScalarField truth = setup.q1 - setup.q2;
  try {
    const ScalarField rec = recover_q(fs, g);
    const double den = l2_norm(truth, lower_half_region(g));
    if (den == 0.0) {
      out.criteria.push_back(Criterion::check("q.null", "recovered q difference norm (q1 = q2)",
                                              l2_norm(rec, lower_half_region(g)), Compare::AtMost, 1e-6));
    } else {
      out.criteria.push_back(Criterion::check("q.error", "relative L2 error of the recovered q1 - q2 on the lower half",
                                              relative_l2(rec, truth, lower_half_region(g)), Compare::AtMost, 0.15));
    }
    out.fields.push_back({"recovered", "recovered q1 - q2", rec});
  } catch (const QualityError& e) {
    out.criteria.push_back(Criterion::check("q.quality", e.what(), 1.0, Compare::Equal, 0.0));
  }
  out.fields.push_back({"truth", "q1 - q2", truth});
  out.summary["flagged"] = fs.flagged_count();
  out.summary["measurable"] = fs.measurable_count();
  return out;
}

}  // namespace

std::vector<std::string> suites_for(const std::string& subcommand, const Scenario& s) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"dbar-verify", {"dbar"}},
      {"cgo-converge", {"transport", "cgo"}},
      {"gauge-check", {"gauge"}},
      {"greens-check", {"greens"}},
      {"identity-verify", {"identity", "contour"}},
      {"reconstruct-curl", {"curl"}},
      {"reconstruct-q", {"q"}},
  };
  if (subcommand == "full") {
    std::vector<std::string> out;
    for (const char* su : {"dbar", "contour", "transport", "cgo", "gauge", "greens", "identity", "curl", "q"})
      if (s.suite_enabled(su)) out.push_back(su);
    return out;
  }
  const auto it = table.find(subcommand);
  if (it == table.end()) throw InputError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

SuiteResult run_suite(const std::string& suite, const Scenario& s, const RunContext& ctx) {
  static const std::map<std::string, SuiteResult (*)(const Scenario&, const RunContext&)> fns{
      {"dbar", suite_dbar},   {"contour", suite_contour}, {"transport", suite_transport},
      {"cgo", suite_cgo},     {"gauge", suite_gauge},     {"greens", suite_greens},
      {"identity", suite_identity}, {"curl", suite_curl}, {"q", suite_q},
  };
  const auto it = fns.find(suite);
  if (it == fns.end()) throw InputError("unknown suite '" + suite + "'");
  const auto t0 = Clock::now();
  note(ctx, suite, "start");
  SuiteResult r = it->second(s, ctx);
  r.seconds = seconds_since(t0);
  note(ctx, suite, std::string(r.pass() ? "pass" : "FAIL") + " in " + format_number(std::round(r.seconds * 10) / 10) + " s");
  return r;
}

int run(const std::string& subcommand, const Scenario& s, const RunContext& ctx, const std::string& out_dir) {
  const std::vector<std::string> suites = suites_for(subcommand, s);
  std::vector<SuiteResult> results;
  for (const auto& su : suites) results.push_back(run_suite(su, s, ctx));
  ReportHeader header{subcommand, s.name, s.hash, s.seed};
  write_artifacts(out_dir, header, results);
  bool pass = true;
  for (const auto& r : results) pass = pass && r.pass();
  return pass ? 0 : 1;
}

}  // namespace cgoh
