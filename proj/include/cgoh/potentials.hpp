#pragma once

#include <cstdint>
#include <vector>

#include "cgoh/common.hpp"

namespace cgoh {

// Gaussian profile exp(-r^2 / (2 sigma^2)) multiplied by a C-infinity window
// that is 1 for r <= taper * radius and 0 for r >= radius.
struct Bump {
  Vec3 center{};
  double sigma = 0.25;
  double radius = 1.0;
  double taper = 0.6;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
};

struct ScalarBump {
  Bump shape;
  cplx amplitude = 1.0;
};

struct VectorBump {
  Bump shape;
  Vec3 amplitude{};
};

struct ScalarBumpSet {
  std::vector<ScalarBump> bumps;
  cplx operator()(const Vec3& x) const;
  CVec3 gradient(const Vec3& x) const;
};

struct VectorBumpSet {
  std::vector<VectorBump> bumps;
  Vec3 operator()(const Vec3& x) const;
};

// Portable deterministic generator (splitmix64); the standard distributions
// are not specified bit-exactly across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Smooth step from 1 (t <= a) to 0 (t >= b) and its derivative.
double smooth_step(double t, double a, double b);
double smooth_step_derivative(double t, double a, double b);

}  // namespace cgoh
