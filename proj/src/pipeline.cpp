#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "cgoh/reconstruct.hpp"

namespace cgoh {

namespace {

using Dir = std::array<int, 3>;

Dir mirror(const Dir& p) { return {p[0], p[1], -p[2]}; }
Dir negate(const Dir& p) { return {-p[0], -p[1], -p[2]}; }

// Representative of {p, -p, Rp, -Rp}: lexicographic maximum of (p3, p1, p2).
Dir canonical(const Dir& m) {
  const int g = std::gcd(std::gcd(std::abs(m[0]), std::abs(m[1])), std::abs(m[2]));
  const Dir p{m[0] / g, m[1] / g, m[2] / g};
  Dir best = p;
  auto key = [](const Dir& d) { return std::array<int, 3>{d[2], d[0], d[1]}; };
  for (const Dir& c : {negate(p), mirror(p), negate(mirror(p))})
    if (key(c) > key(best)) best = c;
  return best;
}

Vec3 to_vec(const Dir& d) { return {double(d[0]), double(d[1]), double(d[2])}; }

// Phi[target] from Phi[base] on a grid symmetric in x3: conjugation gives
// -conj Phi, reflection gives Phi(Rx), an overall sign changes nothing.
struct PhaseOp {
  bool conjugate = false;
  bool mirror = false;
};

std::optional<PhaseOp> resolve(const CVec3& target, const CVec3& base) {
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r) {
      CVec3 w = r ? reflect(base) : base;
      if (c) w = conj(w);
      for (double s : {1.0, -1.0}) {
        double err = 0.0;
        for (int d = 0; d < 3; ++d) err = std::max(err, std::abs(target[d] - s * w[d]));
        if (err < 1e-9) return PhaseOp{c == 1, r == 1};
      }
    }
  return std::nullopt;
}

ScalarField apply(const PhaseOp& op, const ScalarField& f) {
  ScalarField out(f.grid);
  const Grid3& g = f.grid;
  for (int k = 0; k < g.n(2); ++k) {
    const int ks = op.mirror ? g.n(2) - 1 - k : k;
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) {
        const cplx v = f(i, j, ks);
        out(i, j, k) = op.conjugate ? -std::conj(v) : v;
      }
  }
  return out;
}

// Phases of one potential for the base direction of a class.
struct BasePhases {
  CVec3 w{};
  ScalarField limit;               // on W
  std::vector<ScalarField> at_h;   // on W, one per h
};

class ClassEngine {
 public:
  ClassEngine(const ProblemSetup& s, const Workspace& ws, const LimitOptions& lo) : lo_(lo) {
    const std::size_t take = std::min<std::size_t>(std::max(2, lo.richardson_points), lo.h_sequence.size());
    hs_.assign(lo.h_sequence.end() - static_cast<long>(take), lo.h_sequence.end());
    double eps_max = 0.0;
    for (double h : hs_) eps_max = std::max(eps_max, std::cbrt(h));
    const Grid3& G = s.grid();
    const double hmin = std::min({G.h(0), G.h(1), G.h(2)});
    const int layers = static_cast<int>(std::ceil(eps_max / hmin)) + 2;
    // The phases are solved on W padded by the mollifier reach; the padding
    // may extend past the setup grid since the transport solve only needs the
    // potentials on their support.
    const Grid3& W = ws.W;
    Box3 mb = W.box();
    std::array<int, 3> mn{};
    for (int d = 0; d < 3; ++d) {
      mb.lo[d] -= layers * W.h(d);
      mb.hi[d] += layers * W.h(d);
      mn[d] = W.n(d) + 2 * layers;
      Win_.lo[d] = layers;
      Win_.hi[d] = layers + W.n(d) - 1;
    }
    M_ = Grid3(mb, mn);
    same_ = s.A1.c == s.A2.c;
  }

  const std::vector<double>& hs() const { return hs_; }
  bool same_potentials() const { return same_; }

  BasePhases base(const VectorField3& A, const Vec3& gamma1, const Vec3& gamma2) const {
    const Frame frame = Frame::from(gamma1, gamma2);
    BasePhases b;
    b.w = frame.zeta0();
    const ScalarField phi0 = solve_transport_phase_on(A, b.w, frame, M_, lo_.pair.slice);
    b.limit = restrict_to(phi0, Win_);
    const InteriorMollifier mol(phi0);
    for (double h : hs_) b.at_h.push_back(restrict_to(mol.at(std::cbrt(h)), Win_));
    return b;
  }

 private:
  const LimitOptions& lo_;
  std::vector<double> hs_;
  Grid3 M_;
  IndexBox Win_;
  bool same_ = false;
};

struct Job {
  Dir p;
  std::vector<std::size_t> points;
};

std::vector<Job> direction_classes(const XiLattice& L) {
  std::map<Dir, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < L.count(); ++i) {
    if (L.on_line(i)) continue;
    classes[canonical(L.m(i))].push_back(i);
  }
  std::vector<Job> jobs;
  for (auto& [p, pts] : classes) jobs.push_back({p, std::move(pts)});
  return jobs;
}

FourierSamples run_pipeline(const ProblemSetup& s, const XiLattice& L, const PipelineOptions& opts,
                            IdentityKind kind) {
  if (opts.limit.pair.with_remainder)
    throw ArgumentError("pipeline: remainder corrections are only available through limit_identity");
  if (opts.jobs < 1) throw ArgumentError("pipeline: jobs must be at least 1");
  const Workspace ws = Workspace::make(s);
  const ClassEngine engine(s, ws, opts.limit);
  if (kind == IdentityKind::Electric && !engine.same_potentials())
    throw PreconditionError("fourier_samples_q: requires A1 = A2");

  FourierSamples out;
  out.lattice = L;
  out.scalar = kind == IdentityKind::Electric;
  out.v.assign(L.count(), CVec3{});
  out.s.assign(L.count(), 0.0);
  out.measured.assign(L.count(), 0);
  out.flagged.assign(L.count(), 0);
  out.points.assign(L.count(), SamplePoint{});
  out.scale = out.scalar ? ws.scale_q : ws.scale_A;

  const std::vector<Job> jobs = direction_classes(L);
  const std::vector<int> signs = out.scalar ? std::vector<int>{1} : std::vector<int>{1, -1};

  auto run_job = [&](const Job& job) {
    const GammaPair bg = choose_gammas(to_vec(job.p));
    std::optional<BasePhases> b1, b2;
    std::string class_failure;
    try {
      b1 = engine.base(s.A1, bg.gamma1, bg.gamma2);
      b2 = engine.same_potentials() ? b1 : engine.base(s.A2, bg.gamma1, bg.gamma2);
    } catch (const Error& e) {
      class_failure = std::string(e.kind()) + ": " + e.what();
    }
    for (std::size_t idx : job.points) {
      SamplePoint& sp = out.points[idx];
      if (!class_failure.empty()) {
        sp.failure = class_failure;
        out.flagged[idx] = 1;
        continue;
      }
      const Vec3 xi = L.xi(idx);
      const GammaPair gp = choose_gammas(xi);
      std::array<cplx, 2> value{};
      try {
        for (std::size_t si = 0; si < signs.size(); ++si) {
          GammaPair g = gp;
          g.gamma2 = scale(gp.gamma2, signs[si]);
          const CVec3 w1 = complexify(g.gamma1, g.gamma2);
          const CVec3 w2 = complexify(scale(g.gamma1, -1.0), g.gamma2);
          const auto op1 = resolve(w1, b1->w), op2 = resolve(w2, b2->w);
          if (!op1 || !op2) throw EvaluationError("pipeline: direction outside its symmetry class");
          LimitPhases ph;
          ph.phi1_0 = apply(*op1, b1->limit);
          ph.phi2_0 = apply(*op2, b2->limit);
          for (std::size_t k = 0; k < engine.hs().size(); ++k) {
            ph.phi1.push_back(apply(*op1, b1->at_h[k]));
            ph.phi2.push_back(apply(*op2, b2->at_h[k]));
          }
          const LimitResult r = limit_from_phases(ws, xi, g, kind, opts.limit, ph);
          sp.extrapolated[si] = r.extrapolated;
          sp.direct[si] = r.direct;
          sp.discrepancy[si] = r.discrepancy;
          value[si] = opts.use_extrapolated ? r.extrapolated : r.direct;
          if (r.discrepancy > opts.limit.tolerance && sp.failure.empty())
            sp.failure = "convergence: discrepancy " + std::to_string(r.discrepancy);
        }
      } catch (const Error& e) {
        sp.failure = std::string(e.kind()) + ": " + e.what();
      }
      if (!sp.failure.empty()) {
        out.flagged[idx] = 1;
        continue;
      }
      if (out.scalar) {
        out.s[idx] = value[0];
      } else {
        const cplx c1 = 0.5 * (value[0] + value[1]);
        const cplx c2 = (value[0] - value[1]) / (2.0 * kI);
        for (int d = 0; d < 3; ++d) out.v[idx][d] = c1 * gp.gamma1[d] + c2 * gp.gamma2[d];
      }
      out.measured[idx] = 1;
    }
  };

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      run_job(jobs[j]);
      const std::size_t d = ++done;
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        opts.progress(d, jobs.size());
      }
    }
  };
  const int nthreads = std::min<int>(opts.jobs, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace

FourierSamples fourier_samples_A(const ProblemSetup& s, const XiLattice& lattice, const PipelineOptions& opts) {
  return run_pipeline(s, lattice, opts, IdentityKind::Magnetic);
}

FourierSamples fourier_samples_q(const ProblemSetup& s, const XiLattice& lattice, const PipelineOptions& opts) {
  return run_pipeline(s, lattice, opts, IdentityKind::Electric);
}

}  // namespace cgoh
