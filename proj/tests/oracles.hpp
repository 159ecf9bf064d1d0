#pragma once

// Test-only reference computations. Written from first principles and kept
// apart from the library code paths they check.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace oracle {

// Minkowski causal-future membership, closed cone, relative tolerance 1e-9.
inline bool inFutureCone(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  const double dt = b[3] - a[3];
  const double dx = b[0] - a[0], dy = b[1] - a[1], dz = b[2] - a[2];
  const double s2 = dt * dt - (dx * dx + dy * dy + dz * dz);
  const double tol = 1e-9 * (dt * dt > 1.0 ? dt * dt : 1.0);
  return dt >= 0.0 && s2 >= -tol;
}

// Born probability of outcome 0 for a state at `stateDeg` measured along
// `axisDeg` on the X-Z great circle: |<axis|state>|^2 = cos^2(delta/2).
inline double bornZero(double stateDeg, double axisDeg) {
  const double half = (stateDeg - axisDeg) * std::numbers::pi / 360.0;
  return std::cos(half) * std::cos(half);
}

// Per-qubit success of measuring at theta and declaring the outcome on both
// wings, averaged over |0>, |1>, |+>, |->; Z states scored on the Z wing,
// X states on the X wing.
inline double projectivePerQubit(double thetaDeg) {
  const double z0 = bornZero(0.0, thetaDeg);            // |0> -> declare 0
  const double z1 = 1.0 - bornZero(180.0, thetaDeg);    // |1> -> declare 1
  const double x0 = bornZero(90.0, thetaDeg);           // |+> -> declare 0
  const double x1 = 1.0 - bornZero(270.0, thetaDeg);    // |-> -> declare 1
  return 0.25 * (z0 + z1 + x0 + x1);
}

inline double choose(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace oracle
