#pragma once

#include <cmath>
#include <vector>

#include "rigiditylab/common.hpp"
#include "rigiditylab/linalg.hpp"

namespace rigiditylab {

// Unit quaternion, identified with an element of SU(2).
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

inline double quat_dot(const Quat& p, const Quat& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

// Geodesic distance on the 3-sphere, range [0, pi].  Antipodes (q and -q,
// i.e. U and -U in SU(2)) are genuinely far apart under this metric.
inline double quat_dist(const Quat& p, const Quat& q) {
  double d = quat_dot(p, q);
  return std::acos(std::clamp(d, -1.0, 1.0));
}

// Quaternion coordinates of a 2x2 special unitary U = w I - i(x sx + y sy + z sz).
inline Quat quat_from_su2(const Mat& u) {
  if (u.rows() != 2 || u.cols() != 2)
    throw ValidationError("su2", "expected a 2x2 matrix");
  cx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  if (std::abs(det - cx(1.0, 0.0)) > 1e-6)
    throw ValidationError("su2", "matrix is not special unitary");
  Quat q;
  q.w = u(0, 0).real();
  q.z = -u(0, 0).imag();
  q.y = -u(0, 1).real();
  q.x = -u(0, 1).imag();
  return q;
}

// Super-Fibonacci spiral: a deterministic low-discrepancy sample of S^3.
inline std::vector<Quat> super_fibonacci(int n) {
  constexpr double kPhi = 1.4142135623730951;  // sqrt(2)
  constexpr double kPsi = 1.533751168755204288118041;
  std::vector<Quat> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = i + 0.5;
    double t = s / n;
    double d = 2.0 * kPi * s;
    double r = std::sqrt(t);
    double big = std::sqrt(1.0 - t);
    double alpha = d / kPhi;
    double beta = d / kPsi;
    Quat q;
    q.w = r * std::sin(alpha);
    q.x = r * std::cos(alpha);
    q.y = big * std::sin(beta);
    q.z = big * std::cos(beta);
    pts.push_back(q);
  }
  return pts;
}

// Empirical mesh-width bound for the spiral above: measured covering radii
// stay under 2.9 n^(-1/3) up to n = 2e5, reported with margin as 4 n^(-1/3).
inline double probe_mesh_bound(int n) {
  return 4.0 * std::pow(static_cast<double>(n), -1.0 / 3.0);
}

inline constexpr int kDefaultProbeSize = 200000;

}  // namespace rigiditylab
