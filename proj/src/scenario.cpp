#include "cgoh/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <regex>
#include <sstream>

#include "cgoh/field_io.hpp"

namespace cgoh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw InputError("scenario key '" + key + "': " + what);
}

std::vector<std::string> words(const std::string& v) {
  std::istringstream is(v);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& w) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(w, &pos);
    if (pos != w.size() || !std::isfinite(d)) bad(key, "not a finite number: " + w);
    return d;
  } catch (const std::logic_error&) {
    bad(key, "not a number: " + w);
  }
}

long to_long(const std::string& key, const std::string& w) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(w, &pos);
    if (pos != w.size()) bad(key, "not an integer: " + w);
    return v;
  } catch (const std::logic_error&) {
    bad(key, "not an integer: " + w);
  }
}

std::vector<double> doubles(const std::string& key, const std::string& v, std::size_t n) {
  const auto ws = words(v);
  if (n != 0 && ws.size() != n) bad(key, "expected " + std::to_string(n) + " numbers");
  if (ws.empty()) bad(key, "expected numbers");
  std::vector<double> out;
  for (const auto& w : ws) out.push_back(to_double(key, w));
  return out;
}

int positive_int(const std::string& key, const std::string& v, int lo = 1) {
  const auto ws = words(v);
  if (ws.size() != 1) bad(key, "expected one integer");
  const long x = to_long(key, ws[0]);
  if (x < lo || x > 100000) bad(key, "integer out of range");
  return static_cast<int>(x);
}

double positive(const std::string& key, const std::string& v) {
  const auto d = doubles(key, v, 1)[0];
  if (!(d > 0.0)) bad(key, "must be positive");
  return d;
}

bool boolean(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "on" || t == "1") return true;
  if (t == "false" || t == "off" || t == "0") return false;
  bad(key, "expected true or false");
}

FacePatch patch(const std::string& key, const std::string& v) {
  const auto d = words(v);
  if (d.size() != 4) bad(key, "expected i0 i1 j0 j1");
  FacePatch p{static_cast<int>(to_long(key, d[0])), static_cast<int>(to_long(key, d[1])),
              static_cast<int>(to_long(key, d[2])), static_cast<int>(to_long(key, d[3]))};
  if (p.i0 < 0 || p.j0 < 0 || p.i1 < p.i0 || p.j1 < p.j0) bad(key, "empty or negative patch");
  return p;
}

const std::vector<std::string> kSuites{"dbar", "contour", "transport", "cgo", "gauge", "greens", "identity",
                                       "curl", "q"};

void apply(Scenario& s, const std::string& key, const std::string& value, const std::string& base_dir) {
  static const std::regex bump_key(R"(potentials\.(A1|A2|q1|q2|gauge)\.(\d+)\.(center|sigma|radius|taper|amplitude))");
  static const std::regex file_key(R"(potentials\.(A1|A2|q1|q2)\.file)");
  std::smatch m;
  auto field = [&](const std::string& f) -> FieldSpec& {
    if (f == "A1") return s.A1;
    if (f == "A2") return s.A2;
    if (f == "q1") return s.q1;
    if (f == "q2") return s.q2;
    return s.gauge;
  };
  if (std::regex_match(key, m, bump_key)) {
    FieldSpec& fs = field(m[1]);
    const long idx = to_long(key, m[2]);
    if (idx > 63) bad(key, "bump index above 63");
    if (fs.bumps.size() <= static_cast<std::size_t>(idx)) fs.bumps.resize(static_cast<std::size_t>(idx) + 1);
    BumpSpec& b = fs.bumps[static_cast<std::size_t>(idx)];
    const std::string attr = m[3];
    if (attr == "center") {
      const auto d = doubles(key, value, 3);
      b.center = {d[0], d[1], d[2]};
    } else if (attr == "amplitude") {
      const bool vector = m[1] == "A1" || m[1] == "A2";
      const auto d = doubles(key, value, 0);
      if (vector && d.size() != 3) bad(key, "vector amplitude needs 3 numbers");
      if (!vector && d.size() > 2) bad(key, "scalar amplitude takes re [im]");
      b.amplitude = {d[0], d.size() > 1 ? d[1] : 0.0, d.size() > 2 ? d[2] : 0.0};
      if (m[1] == "gauge" && b.amplitude[1] != 0.0) bad(key, "gauge function must be real");
    } else if (attr == "sigma") {
      b.sigma = positive(key, value);
    } else if (attr == "radius") {
      b.radius = positive(key, value);
    } else {
      b.taper = doubles(key, value, 1)[0];
      if (!(b.taper >= 0.0 && b.taper < 1.0)) bad(key, "taper must lie in [0, 1)");
    }
    return;
  }
  if (std::regex_match(key, m, file_key)) {
    std::filesystem::path p(trim(value));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    if (!std::filesystem::exists(p)) bad(key, "file not found: " + p.string());
    field(m[1]).file = std::filesystem::weakly_canonical(p).string();
    return;
  }
  if (key.rfind("suites.", 0) == 0) {
    const std::string su = key.substr(7);
    if (std::find(kSuites.begin(), kSuites.end(), su) == kSuites.end()) bad(key, "unknown suite");
    s.suites[su] = boolean(key, value);
    return;
  }
  static const std::map<std::string, std::function<void(Scenario&, const std::string&, const std::string&)>> simple{
      {"name", [](Scenario& s, const std::string& k, const std::string& v) {
         if (trim(v).empty()) bad(k, "empty name");
         s.name = trim(v);
       }},
      {"seed", [](Scenario& s, const std::string& k, const std::string& v) {
         const auto w = words(v);
         if (w.size() != 1) bad(k, "expected one integer");
         try {
           s.seed = std::stoull(w[0]);
         } catch (const std::logic_error&) {
           bad(k, "not an unsigned integer");
         }
       }},
      {"grid.n", [](Scenario& s, const std::string& k, const std::string& v) {
         const auto d = words(v);
         if (d.size() != 3) bad(k, "expected three node counts");
         for (int i = 0; i < 3; ++i) {
           const long n = to_long(k, d[static_cast<std::size_t>(i)]);
           if (n < 8 || n > 512) bad(k, "node count out of range [8, 512]");
           s.grid_n[static_cast<std::size_t>(i)] = static_cast<int>(n);
         }
         if (s.grid_n[2] % 2 == 0) bad(k, "the x3 node count must be odd so that a node row lies on x3 = 0");
       }},
      {"grid.half_width", [](Scenario& s, const std::string& k, const std::string& v) { s.half_width = positive(k, v); }},
      {"k", [](Scenario& s, const std::string& k, const std::string& v) { s.k = positive(k, v); }},
      {"h_sequence", [](Scenario& s, const std::string& k, const std::string& v) {
         s.h_sequence = doubles(k, v, 0);
         for (std::size_t i = 0; i < s.h_sequence.size(); ++i) {
           if (!(s.h_sequence[i] > 0.0 && s.h_sequence[i] < 1.0)) bad(k, "h values must lie in (0, 1)");
           if (i > 0 && !(s.h_sequence[i] < s.h_sequence[i - 1])) bad(k, "h values must decrease");
         }
         if (s.h_sequence.size() < 2) bad(k, "need at least two h values");
       }},
      {"lattice.n", [](Scenario& s, const std::string& k, const std::string& v) { s.lattice_n = positive_int(k, v, 4); }},
      {"lattice.dxi", [](Scenario& s, const std::string& k, const std::string& v) { s.lattice_dxi = positive(k, v); }},
      {"limit.tolerance", [](Scenario& s, const std::string& k, const std::string& v) { s.limit_tolerance = positive(k, v); }},
      {"limit.richardson_points",
       [](Scenario& s, const std::string& k, const std::string& v) { s.richardson_points = positive_int(k, v, 2); }},
      {"limit.order", [](Scenario& s, const std::string& k, const std::string& v) { s.richardson_order = positive(k, v); }},
      {"gamma.patch1", [](Scenario& s, const std::string& k, const std::string& v) { s.gamma1 = patch(k, v); }},
      {"gamma.patch2", [](Scenario& s, const std::string& k, const std::string& v) { s.gamma2 = patch(k, v); }},
      {"dbar.n", [](Scenario& s, const std::string& k, const std::string& v) { s.dbar_n = positive_int(k, v, 16); }},
      {"dbar.fields", [](Scenario& s, const std::string& k, const std::string& v) { s.dbar_fields = positive_int(k, v); }},
      {"transport.n", [](Scenario& s, const std::string& k, const std::string& v) { s.transport_n = positive_int(k, v, 16); }},
      {"transport.potentials",
       [](Scenario& s, const std::string& k, const std::string& v) { s.transport_potentials = positive_int(k, v); }},
      {"cgo.n", [](Scenario& s, const std::string& k, const std::string& v) { s.cgo_n = positive_int(k, v, 16); }},
      {"gauge.n", [](Scenario& s, const std::string& k, const std::string& v) { s.gauge_n = positive_int(k, v, 12); }},
      {"gauge.trials", [](Scenario& s, const std::string& k, const std::string& v) { s.gauge_trials = positive_int(k, v); }},
      {"greens.n", [](Scenario& s, const std::string& k, const std::string& v) { s.greens_n = positive_int(k, v, 12); }},
      {"greens.trials", [](Scenario& s, const std::string& k, const std::string& v) { s.greens_trials = positive_int(k, v); }},
      {"contour.slices", [](Scenario& s, const std::string& k, const std::string& v) { s.contour_slices = positive_int(k, v); }},
      {"output", [](Scenario& s, const std::string& k, const std::string& v) {
         if (trim(v).empty()) bad(k, "empty output directory");
         s.output = trim(v);
       }},
  };
  const auto it = simple.find(key);
  if (it == simple.end()) bad(key, "unknown key");
  it->second(s, key, value);
}

void check_bumps(const FieldSpec& f, const std::string& name) {
  for (std::size_t i = 0; i < f.bumps.size(); ++i) {
    const BumpSpec& b = f.bumps[i];
    if (b.center[2] + b.radius > 0.0)
      bad("potentials." + name + "." + std::to_string(i) + ".center",
          "bump reaches into x3 > 0; potentials are given on the lower half");
  }
  if (!f.bumps.empty() && !f.file.empty()) bad("potentials." + name + ".file", "give either bumps or a file");
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Grid3 Scenario::grid() const {
  const double w = half_width;
  return Grid3(Box3{{-w, -w, -w}, {w, w, w}}, grid_n);
}

LimitOptions Scenario::limit_options() const {
  LimitOptions o;
  o.h_sequence = h_sequence;
  o.richardson_points = richardson_points;
  o.order = richardson_order;
  o.tolerance = limit_tolerance;
  return o;
}

XiLattice Scenario::lattice() const {
  XiLattice L;
  L.n = lattice_n;
  L.dxi = lattice_dxi;
  return L;
}

bool Scenario::suite_enabled(const std::string& suite) const {
  const auto it = suites.find(suite);
  return it == suites.end() ? true : it->second;
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir,
                        const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("scenario line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("scenario line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError("scenario line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.count(key)) bad(key, "given twice (line " + std::to_string(lineno) + ")");
    kv[key] = trim(line.substr(eq + 1));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw InputError("override '" + o + "': expected KEY=VALUE");
    kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }

  Scenario s;
  std::ostringstream canon;
  for (const auto& [k, v] : kv) {
    apply(s, k, v, base_dir);
    canon << k << " = " << v << "\n";
  }
  check_bumps(s.A1, "A1");
  check_bumps(s.A2, "A2");
  check_bumps(s.q1, "q1");
  check_bumps(s.q2, "q2");
  check_bumps(s.gauge, "gauge");
  for (const auto& [name, f] : {std::pair<const char*, const FieldSpec*>{"A1", &s.A1}, {"A2", &s.A2},
                                {"q1", &s.q1}, {"q2", &s.q2}, {"gauge", &s.gauge}})
    for (std::size_t i = 0; i < f->bumps.size(); ++i)
      if (f->bumps[i].sigma <= 0.0 || f->bumps[i].radius <= 0.0)
        bad(std::string("potentials.") + name + "." + std::to_string(i), "bump needs positive sigma and radius");
  if (!s.A2.empty() && !s.gauge.empty()) bad("potentials.gauge", "a gauge function replaces A2; give only one");
  if (s.lattice_n % 2 != 0) bad("lattice.n", "must be even");
  s.canonical = canon.str();
  s.hash = fnv1a_hex(s.canonical);
  return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw InputError("scenario file not readable: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string dir = std::filesystem::absolute(path).parent_path().string();
  return parse_scenario(ss.str(), dir, overrides);
}

namespace {

Bump to_bump(const BumpSpec& b) { return Bump{b.center, b.sigma, b.radius, b.taper}; }

}  // namespace

VectorField3 sample_vector_bumps(const Grid3& g, const std::vector<BumpSpec>& bumps, bool lower_only) {
  VectorBumpSet set;
  for (const auto& b : bumps) set.bumps.push_back({to_bump(b), b.amplitude});
  return sample_vector(g, [&](const Vec3& x) {
    return (lower_only && x[2] > 0.0) ? Vec3{} : set(x);
  });
}

ScalarField sample_scalar_bumps(const Grid3& g, const std::vector<BumpSpec>& bumps, bool lower_only) {
  ScalarBumpSet set;
  for (const auto& b : bumps) set.bumps.push_back({to_bump(b), cplx(b.amplitude[0], b.amplitude[1])});
  return sample(g, [&](const Vec3& x) { return (lower_only && x[2] > 0.0) ? cplx(0.0) : set(x); });
}

namespace {

VectorField3 vector_field(const Grid3& g, const FieldSpec& f, const char* name) {
  if (!f.file.empty()) {
    VectorField3 V = io::read_vector(f.file);
    if (V.grid.n(0) != g.n(0) || V.grid.n(1) != g.n(1) || V.grid.n(2) != g.n(2))
      bad(std::string("potentials.") + name + ".file", "field dump does not match grid.n");
    V.grid = g;
    for (int d = 0; d < 3; ++d)
      for (auto& v : V.c[d]) {
        if (v.imag() != 0.0) bad(std::string("potentials.") + name + ".file", "magnetic potential must be real");
      }
    return V;
  }
  return sample_vector_bumps(g, f.bumps, true);
}

ScalarField scalar_field(const Grid3& g, const FieldSpec& f, const char* name) {
  if (!f.file.empty()) {
    ScalarField q = io::read_scalar(f.file);
    if (q.grid.n(0) != g.n(0) || q.grid.n(1) != g.n(1) || q.grid.n(2) != g.n(2))
      bad(std::string("potentials.") + name + ".file", "field dump does not match grid.n");
    q.grid = g;
    return q;
  }
  return sample_scalar_bumps(g, f.bumps, true);
}

// Keeps only x3 <= 0.
void lower_half(VectorField3& V) {
  const Grid3& g = V.grid;
  for (int k = g.plane_row() + 1; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i)
        for (int d = 0; d < 3; ++d) V.c[d][g.index(i, j, k)] = 0.0;
}

void lower_half(ScalarField& f) {
  const Grid3& g = f.grid;
  for (int k = g.plane_row() + 1; k < g.n(2); ++k)
    for (int j = 0; j < g.n(1); ++j)
      for (int i = 0; i < g.n(0); ++i) f.v[g.index(i, j, k)] = 0.0;
}

}  // namespace

ProblemSetup build_setup(const Scenario& s, bool common_A) {
  const Grid3 g = s.grid();
  VectorField3 A1 = vector_field(g, s.A1, "A1");
  VectorField3 A2(g, false);
  if (common_A) {
    A2 = A1;
  } else if (!s.gauge.empty()) {
    A2 = A1;
    std::vector<Bump> shapes;
    for (const auto& b : s.gauge.bumps) shapes.push_back(to_bump(b));
    for (int kk = 0; kk <= g.plane_row(); ++kk)
      for (int j = 0; j < g.n(1); ++j)
        for (int i = 0; i < g.n(0); ++i) {
          const Vec3 x = g.node(i, j, kk);
          Vec3 grad{};
          for (std::size_t b = 0; b < shapes.size(); ++b)
            grad = add(grad, scale(shapes[b].gradient(x), s.gauge.bumps[b].amplitude[0]));
          const std::size_t n = g.index(i, j, kk);
          for (int d = 0; d < 3; ++d) A2.c[d][n] += grad[d];
        }
  } else {
    A2 = vector_field(g, s.A2, "A2");
  }
  ScalarField q1 = scalar_field(g, s.q1, "q1");
  ScalarField q2 = s.q2.empty() ? q1 : scalar_field(g, s.q2, "q2");
  lower_half(A1);
  lower_half(A2);
  lower_half(q1);
  lower_half(q2);
  const ReflectedPair p1 = prepare_potentials(A1, q1);
  const ReflectedPair p2 = prepare_potentials(A2, q2);
  ProblemSetup out{p1.A, p2.A, p1.q, p2.q, s.k};
  out.validate();
  return out;
}

}  // namespace cgoh
