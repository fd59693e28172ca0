#pragma once

#include "cgoh/common.hpp"

namespace cgoh {

// Seven-point coefficients of (L_{A,q} - k^2) u = -Lap u - 2i A.grad u
// - i (div A) u + |A|^2 u + q u - k^2 u with central differences.
struct SevenPoint {
  cplx centre = 0.0;
  std::array<cplx, 3> plus{};
  std::array<cplx, 3> minus{};
};

inline SevenPoint forward_coefficients(const Vec3& A, double divA, cplx q, double k, const Vec3& d) {
  SevenPoint s;
  s.centre = -kI * divA + dot(A, A) + q - k * k;
  for (int j = 0; j < 3; ++j) {
    const double inv2 = 1.0 / (d[j] * d[j]);
    s.centre += 2.0 * inv2;
    s.plus[j] = -inv2 - kI * A[j] / d[j];
    s.minus[j] = -inv2 + kI * A[j] / d[j];
  }
  return s;
}

}  // namespace cgoh
