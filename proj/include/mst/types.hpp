#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>

namespace mst {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return (1.0 / norm(a)) * a; }
inline Vec3 mirror_z(Vec3 a) { return {a.x, a.y, -a.z}; }

// Complex 3-vector (CGO frequencies zeta, zeta0).
struct CVec3 {
  cplx x{}, y{}, z{};

  cplx& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  cplx operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline CVec3 operator+(CVec3 a, CVec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline CVec3 operator*(cplx s, CVec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline CVec3 to_cvec(Vec3 a) { return {cplx(a.x), cplx(a.y), cplx(a.z)}; }

// Bilinear (no conjugation): used for the isotropy condition zeta.zeta = 0.
inline cplx bdot(CVec3 a, CVec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline cplx bdot(CVec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline CVec3 conj(CVec3 a) { return {std::conj(a.x), std::conj(a.y), std::conj(a.z)}; }

}  // namespace mst
