#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cgoh {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline cplx dot(const CVec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline cplx dot(const Vec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
// Bilinear (no conjugation).
inline cplx dot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline CVec3 cross(const Vec3& a, const CVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm(const CVec3& a) {
  return std::sqrt(std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]));
}
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline CVec3 conj(const CVec3& a) { return {std::conj(a[0]), std::conj(a[1]), std::conj(a[2])}; }
inline Vec3 real(const CVec3& a) { return {a[0].real(), a[1].real(), a[2].real()}; }
inline Vec3 imag(const CVec3& a) { return {a[0].imag(), a[1].imag(), a[2].imag()}; }
inline CVec3 complexify(const Vec3& re, const Vec3& im) {
  return {cplx(re[0], im[0]), cplx(re[1], im[1]), cplx(re[2], im[2])};
}

// Mirror through the plane x3 = 0.
inline Vec3 reflect(const Vec3& x) { return {x[0], x[1], -x[2]}; }
inline CVec3 reflect(const CVec3& x) { return {x[0], x[1], -x[2]}; }

// Error taxonomy. Each kind maps onto a named failure of an operation.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define CGOH_ERROR(Name, Tag)                                        \
  struct Name : Error {                                              \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return Tag; }       \
  }

CGOH_ERROR(ArgumentError, "argument");
CGOH_ERROR(EvaluationError, "evaluation");
CGOH_ERROR(SupportError, "support");
CGOH_ERROR(ParameterError, "parameter");
CGOH_ERROR(ProximityError, "proximity");
CGOH_ERROR(ResolutionError, "resolution");
CGOH_ERROR(NonVanishingError, "non-vanishing");
CGOH_ERROR(SolverError, "solver");
CGOH_ERROR(ResonanceError, "resonance");
CGOH_ERROR(PreconditionError, "precondition");
CGOH_ERROR(GridError, "grid");
CGOH_ERROR(RestrictionError, "restriction");
CGOH_ERROR(ExclusionError, "exclusion");
CGOH_ERROR(ConvergenceError, "convergence");
CGOH_ERROR(AmplitudeError, "amplitude");
CGOH_ERROR(QualityError, "quality");
CGOH_ERROR(InputError, "input");

#undef CGOH_ERROR

}  // namespace cgoh
