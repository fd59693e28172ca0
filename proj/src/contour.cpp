#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

#include "cgoh/dbar.hpp"
#include "cgoh/fft.hpp"

namespace cgoh {

void Contour::validate() const {
  if (z.size() < 3) throw ArgumentError("contour: need at least 3 samples");
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!std::isfinite(z[j].real()) || !std::isfinite(z[j].imag()))
      throw ArgumentError("contour: non-finite sample " + std::to_string(j));
    const std::size_t nxt = j + 1 < z.size() ? j + 1 : 0;
    if ((closed || j + 1 < z.size()) && z[j] == z[nxt])
      throw ArgumentError("contour: repeated consecutive sample " + std::to_string(j));
  }
}

double Contour::mesh() const {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < z.size(); ++j) m = std::max(m, std::abs(z[j + 1] - z[j]));
  if (closed) m = std::max(m, std::abs(z.front() - z.back()));
  return m;
}

Contour circle(cplx centre, double radius, int samples) {
  if (samples < 3 || !(radius > 0.0)) throw ArgumentError("circle: bad radius or sample count");
  Contour c;
  c.closed = true;
  c.z.resize(samples);
  for (int j = 0; j < samples; ++j) c.z[j] = centre + std::polar(radius, 2.0 * kPi * j / samples);
  return c;
}

std::vector<cplx> contour_weights(const Contour& c) {
  c.validate();
  const int n = static_cast<int>(c.z.size());
  std::vector<cplx> w(n, 0.0);
  if (!c.closed) {
    for (int j = 0; j + 1 < n; ++j) {
      const cplx dz = 0.5 * (c.z[j + 1] - c.z[j]);
      w[j] += dz;
      w[j + 1] += dz;
    }
    return w;
  }
  // Spectral derivative dz/dt on t in [0, 2 pi); weight = z'(t_j) * 2 pi / n.
  std::vector<cplx> zh = c.z;
  fft::transform({n}, zh.data(), -1);
  for (int m = 0; m < n; ++m) {
    int k = m <= n / 2 ? m : m - n;
    if (n % 2 == 0 && m == n / 2) k = 0;  // drop the Nyquist mode
    zh[m] *= kI * static_cast<double>(k);
  }
  fft::transform({n}, zh.data(), +1);
  for (int j = 0; j < n; ++j) w[j] = zh[j] / static_cast<double>(n) * (2.0 * kPi / n);
  return w;
}

cplx contour_integral(const Contour& c, const std::vector<cplx>& values) {
  if (values.size() != c.z.size()) throw ArgumentError("contour_integral: value count mismatch");
  const auto w = contour_weights(c);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * values[j];
  return acc;
}

cplx plemelj_interior(const Contour& c, const std::vector<cplx>& g, cplx z) {
  if (!c.closed) throw ArgumentError("plemelj_interior: contour must be closed");
  if (g.size() != c.z.size()) throw ArgumentError("plemelj_interior: value count mismatch");
  const double h = c.mesh();
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& s : c.z) dmin = std::min(dmin, std::abs(s - z));
  if (dmin < 2.0 * h) throw ProximityError("plemelj_interior: evaluation point within two mesh widths of the contour");
  const auto w = contour_weights(c);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * g[j] / (c.z[j] - z);
  return acc / (2.0 * kPi * kI);
}

int winding_number(const Contour& path) {
  if (!path.closed) throw ArgumentError("winding_number: path must be closed");
  path.validate();
  const std::size_t n = path.z.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx a = path.z[j], b = path.z[(j + 1) % n];
    if (a == 0.0) throw ArgumentError("winding_number: path passes through the origin");
    const double step = std::arg(b / a);
    if (std::abs(step) >= 0.5 * kPi)
      throw ResolutionError("winding_number: consecutive samples subtend more than pi/2 at the origin");
    total += step;
  }
  const double w = total / (2.0 * kPi);
  const double r = std::round(w);
  if (std::abs(w - r) > 0.05) throw ResolutionError("winding_number: non-integer total phase change");
  return static_cast<int>(r);
}

PlaneField holomorphic_log(const PlaneField& F, const std::vector<char>& mask, int bi, int bj, cplx w0) {
  const Grid2& g = F.grid;
  if (mask.size() != g.size()) throw ArgumentError("holomorphic_log: mask size mismatch");
  if (bi < 0 || bj < 0 || bi >= g.n[0] || bj >= g.n[1] || !mask[g.index(bi, bj)])
    throw ArgumentError("holomorphic_log: base node outside the region");
  double fmax = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    if (mask[n]) fmax = std::max(fmax, std::abs(F.v[n]));
  for (std::size_t n = 0; n < g.size(); ++n)
    if (mask[n] && !(std::abs(F.v[n]) > 1e-14 * fmax)) {
      std::ostringstream os;
      os << "holomorphic_log: F vanishes at node (" << n % g.n[0] << "," << n / g.n[0] << ")";
      throw NonVanishingError(os.str());
    }
  const cplx fb = F(bi, bj);
  if (std::abs(std::exp(w0) - fb) > 1e-8 * std::abs(fb))
    throw ArgumentError("holomorphic_log: exp(w0) does not match F at the base node");

  PlaneField L(g, 0.0);
  std::vector<char> seen(g.size(), 0);
  std::deque<std::pair<int, int>> queue;
  L(bi, bj) = w0;
  seen[g.index(bi, bj)] = 1;
  queue.emplace_back(bi, bj);
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    const double im = L(i, j).imag();
    for (int e = 0; e < 4; ++e) {
      const int a = i + di[e], b = j + dj[e];
      if (a < 0 || b < 0 || a >= g.n[0] || b >= g.n[1]) continue;
      const std::size_t n = g.index(a, b);
      if (!mask[n] || seen[n]) continue;
      const double ang = std::arg(F.v[n]);
      const double jump = std::remainder(ang - im, 2.0 * kPi);
      L.v[n] = cplx(std::log(std::abs(F.v[n])), im + jump);
      seen[n] = 1;
      queue.emplace_back(a, b);
    }
  }
  // Every edge of the region, not only the BFS tree, must be resolved.
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      const std::size_t n = g.index(i, j);
      if (!mask[n]) continue;
      if (!seen[n]) throw ArgumentError("holomorphic_log: region is not connected");
      for (int e = 0; e < 4; e += 2) {
        const int a = i + (e == 0 ? 1 : 0), b = j + (e == 2 ? 1 : 0);
        if (a >= g.n[0] || b >= g.n[1]) continue;
        const std::size_t m = g.index(a, b);
        if (!mask[m]) continue;
        if (std::abs(L.v[m].imag() - L.v[n].imag()) >= kPi)
          throw ResolutionError("holomorphic_log: phase jump of at least pi between adjacent nodes");
      }
    }
  return L;
}

}  // namespace cgoh
