#include "cgoh/dbar.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "cgoh/fft.hpp"

namespace cgoh {

Grid2::Grid2(std::array<double, 2> lo_, std::array<double, 2> hi_, std::array<int, 2> n_) : lo(lo_), hi(hi_), n(n_) {
  for (int a = 0; a < 2; ++a) {
    if (n[a] < 3) throw GridError("plane grid: need at least 3 nodes per axis");
    if (!(hi[a] > lo[a])) throw GridError("plane grid: empty rectangle");
    d[a] = (hi[a] - lo[a]) / (n[a] - 1);
  }
}

double l2_norm(const PlaneField& f) {
  double acc = 0.0;
  for (int j = 0; j < f.grid.n[1]; ++j)
    for (int i = 0; i < f.grid.n[0]; ++i) acc += std::norm(f(i, j));
  return std::sqrt(acc * f.grid.d[0] * f.grid.d[1]);
}

PlaneField dbar_apply(const PlaneField& g) {
  const Grid2& G = g.grid;
  PlaneField out(G);
  const double ix = 1.0 / (2.0 * G.d[0]), iy = 1.0 / (2.0 * G.d[1]);
  for (int j = 0; j < G.n[1]; ++j)
    for (int i = 0; i < G.n[0]; ++i) {
      cplx dx, dy;
      if (i == 0)
        dx = (-3.0 * g(0, j) + 4.0 * g(1, j) - g(2, j)) * ix;
      else if (i == G.n[0] - 1)
        dx = (3.0 * g(i, j) - 4.0 * g(i - 1, j) + g(i - 2, j)) * ix;
      else
        dx = (g(i + 1, j) - g(i - 1, j)) * ix;
      if (j == 0)
        dy = (-3.0 * g(i, 0) + 4.0 * g(i, 1) - g(i, 2)) * iy;
      else if (j == G.n[1] - 1)
        dy = (3.0 * g(i, j) - 4.0 * g(i, j - 1) + g(i, j - 2)) * iy;
      else
        dy = (g(i, j + 1) - g(i, j - 1)) * iy;
      out(i, j) = 0.5 * (dx + kI * dy);
    }
  return out;
}

namespace {

// Antiderivative of 1/(x + i y) in x and y: -i (z log z - z). The log branch
// cut is moved off the closed half-plane that contains the rectangle.
cplx corner(double x, double y, bool upper) {
  if (x == 0.0 && y == 0.0) return 0.0;
  const double yy = upper ? (y == 0.0 ? 0.0 : y) : (y == 0.0 ? -0.0 : y);
  const cplx z(x, yy);
  double arg = std::atan2(yy, x);
  if (upper && arg < 0.0) arg += 2.0 * kPi;
  if (!upper && arg > 0.0) arg -= 2.0 * kPi;
  const cplx lz(std::log(std::abs(z)), arg);
  return -kI * (z * lz - z);
}

cplx rect_integral(double x1, double x2, double y1, double y2) {
  // y1 < y2; split so that each piece lies in a closed half-plane.
  if (y1 < 0.0 && y2 > 0.0) return rect_integral(x1, x2, y1, 0.0) + rect_integral(x1, x2, 0.0, y2);
  const bool upper = y1 >= 0.0;
  return corner(x2, y2, upper) - corner(x1, y2, upper) - corner(x2, y1, upper) + corner(x1, y1, upper);
}

}  // namespace

cplx cauchy_kernel_cell_average(double cx, double cy, double dx, double dy) {
  if (!(dx > 0.0) || !(dy > 0.0)) throw ArgumentError("cauchy kernel: cell sides must be positive");
  const double hmax = std::max(dx, dy);
  const cplx c(cx, cy);
  if (std::abs(c) > 32.0 * hmax) {
    // Midpoint expansion; the next neglected term is O((h/|c|)^6).
    const cplx c2 = c * c;
    const cplx inv = 1.0 / c;
    const double dx2 = dx * dx, dy2 = dy * dy;
    const cplx avg = inv + (dx2 - dy2) / 12.0 * inv / c2 +
                     ((dx2 * dx2 + dy2 * dy2) / 80.0 - dx2 * dy2 / 24.0) * inv / (c2 * c2);
    return avg / kPi;
  }
  const cplx I = rect_integral(cx - 0.5 * dx, cx + 0.5 * dx, cy - 0.5 * dy, cy + 0.5 * dy);
  return I / (kPi * dx * dy);
}

namespace {

using KernelKey = std::tuple<int, int, double, double>;

std::shared_ptr<const std::vector<cplx>> kernel_spectrum(int n0, int n1, int m0, int m1, double dx, double dy) {
  static std::mutex mutex;
  static std::map<KernelKey, std::shared_ptr<const std::vector<cplx>>> cache;
  const KernelKey key{n0, n1, dx, dy};
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto k = std::make_shared<std::vector<cplx>>(static_cast<std::size_t>(m0) * m1, 0.0);
  const double area = dx * dy;
  for (int b = 0; b < m1; ++b) {
    int ob;
    if (b < n1)
      ob = b;
    else if (b > m1 - n1)
      ob = b - m1;
    else
      continue;
    for (int a = 0; a < m0; ++a) {
      int oa;
      if (a < n0)
        oa = a;
      else if (a > m0 - n0)
        oa = a - m0;
      else
        continue;
      (*k)[static_cast<std::size_t>(a) + static_cast<std::size_t>(m0) * b] =
          area * cauchy_kernel_cell_average(oa * dx, ob * dy, dx, dy);
    }
  }
  fft::transform({m1, m0}, k->data(), -1);
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(k));
  if (cache.size() > 64 && inserted) {
    // Bounded: drop everything except the entry just built.
    auto keep = it->second;
    cache.clear();
    cache.emplace(key, keep);
    return keep;
  }
  return it->second;
}

}  // namespace

CauchyPlan::CauchyPlan(int n0, int n1, double dx, double dy) : n0_(n0), n1_(n1) {
  if (n0 < 3 || n1 < 3) throw GridError("cauchy: grid too small");
  m0_ = fft::good_size(2 * n0 - 1);
  m1_ = fft::good_size(2 * n1 - 1);
  kernel_hat_ = kernel_spectrum(n0, n1, m0_, m1_, dx, dy);
  work_.assign(static_cast<std::size_t>(m0_) * m1_, 0.0);
}

void CauchyPlan::apply(const cplx* in, cplx* out) {
  std::fill(work_.begin(), work_.end(), cplx(0.0));
  for (int j = 0; j < n1_; ++j)
    for (int i = 0; i < n0_; ++i)
      work_[static_cast<std::size_t>(i) + static_cast<std::size_t>(m0_) * j] = in[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0_) * j];
  fft::transform({m1_, m0_}, work_.data(), -1);
  const auto& kh = *kernel_hat_;
  const double scale = 1.0 / (static_cast<double>(m0_) * m1_);
  for (std::size_t n = 0; n < work_.size(); ++n) work_[n] *= kh[n] * scale;
  fft::transform({m1_, m0_}, work_.data(), +1);
  for (int j = 0; j < n1_; ++j)
    for (int i = 0; i < n0_; ++i)
      out[static_cast<std::size_t>(i) + static_cast<std::size_t>(n0_) * j] = work_[static_cast<std::size_t>(i) + static_cast<std::size_t>(m0_) * j];
}

PlaneField cauchy_transform(const PlaneField& f) {
  const Grid2& g = f.grid;
  double inner = 0.0, edge = 0.0;
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      const double a = std::abs(f(i, j));
      if (!std::isfinite(a)) throw EvaluationError("cauchy_transform: non-finite data");
      inner = std::max(inner, a);
      if (i == 0 || j == 0 || i == g.n[0] - 1 || j == g.n[1] - 1) edge = std::max(edge, a);
    }
  if (edge > 1e-8 * inner) throw SupportError("cauchy_transform: data does not vanish on the grid boundary");
  PlaneField out(g);
  CauchyPlan plan(g.n[0], g.n[1], g.d[0], g.d[1]);
  plan.apply(f.v.data(), out.v.data());
  return out;
}

}  // namespace cgoh
