#include "cgoh/potentials.hpp"

namespace cgoh {
namespace {

double phi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double dphi(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

}  // namespace

double smooth_step(double t, double a, double b) {
  if (t <= a) return 1.0;
  if (t >= b) return 0.0;
  const double s = (t - a) / (b - a);
  const double P = phi(1.0 - s), Q = phi(s);
  return P / (P + Q);
}

double smooth_step_derivative(double t, double a, double b) {
  if (t <= a || t >= b) return 0.0;
  const double s = (t - a) / (b - a);
  const double P = phi(1.0 - s), Q = phi(s);
  const double dP = -dphi(1.0 - s), dQ = dphi(s);
  return (dP * Q - P * dQ) / ((P + Q) * (P + Q)) / (b - a);
}

double Bump::value(const Vec3& x) const {
  const Vec3 d = sub(x, center);
  const double r2 = dot(d, d);
  if (r2 >= radius * radius) return 0.0;
  return std::exp(-r2 / (2.0 * sigma * sigma)) * smooth_step(std::sqrt(r2), taper * radius, radius);
}

Vec3 Bump::gradient(const Vec3& x) const {
  const Vec3 d = sub(x, center);
  const double r2 = dot(d, d);
  if (r2 >= radius * radius) return {0.0, 0.0, 0.0};
  const double r = std::sqrt(r2);
  const double g = std::exp(-r2 / (2.0 * sigma * sigma));
  const double w = smooth_step(r, taper * radius, radius);
  // d/dr of g*w divided by r, so that grad = (that) * d.
  double coeff = -g * w / (sigma * sigma);
  if (r > 0.0) coeff += g * smooth_step_derivative(r, taper * radius, radius) / r;
  return scale(d, coeff);
}

cplx ScalarBumpSet::operator()(const Vec3& x) const {
  cplx acc = 0.0;
  for (const auto& b : bumps) acc += b.amplitude * b.shape.value(x);
  return acc;
}

CVec3 ScalarBumpSet::gradient(const Vec3& x) const {
  CVec3 acc{0.0, 0.0, 0.0};
  for (const auto& b : bumps) {
    const Vec3 g = b.shape.gradient(x);
    for (int d = 0; d < 3; ++d) acc[d] += b.amplitude * g[d];
  }
  return acc;
}

Vec3 VectorBumpSet::operator()(const Vec3& x) const {
  Vec3 acc{0.0, 0.0, 0.0};
  for (const auto& b : bumps) {
    const double v = b.shape.value(x);
    for (int d = 0; d < 3; ++d) acc[d] += b.amplitude[d] * v;
  }
  return acc;
}

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

}  // namespace cgoh
