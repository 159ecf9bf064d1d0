#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rqbc/errors.hpp"

namespace rqbc {

// Natural units throughout: c = 1.

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

// A point of Minkowski space.
struct Event {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;

  Vec3 position() const { return {x, y, z}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(t);
  }

  static Event at(const Vec3& p, double t) { return {p.x, p.y, p.z, t}; }

  friend bool operator==(const Event&, const Event&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Event& e) {
  return os << '(' << e.x << ", " << e.y << ", " << e.z << ", " << e.t << ')';
}

// Relative tolerance under which an interval counts as null.
inline constexpr double kLightlikeTolerance = 1e-9;

// Signature (+,-,-,-).
inline double intervalSquared(const Event& a, const Event& b) {
  const double dt = b.t - a.t;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  return dt * dt - dx * dx - dy * dy - dz * dz;
}

inline double lightlikeSlack(const Event& a, const Event& b) {
  const double dt = b.t - a.t;
  return kLightlikeTolerance * std::max(1.0, dt * dt);
}

inline bool isLightlike(const Event& a, const Event& b) {
  return std::abs(intervalSquared(a, b)) <= lightlikeSlack(a, b);
}

// True when b lies in the closed future light cone of a.
inline bool causallyPrecedes(const Event& a, const Event& b) {
  return b.t >= a.t && intervalSquared(a, b) >= -lightlikeSlack(a, b);
}

// Displacement of one of Bob's laboratories from its ideal point. For the
// preparation lab `delay` is how long before P the states leave; for the
// unveiling labs it is how long after Q_i the data is taken in.
struct LabOffset {
  Vec3 displacement;
  double delay = 0.0;

  friend bool operator==(const LabOffset&, const LabOffset&) = default;
};

struct LabOffsets {
  LabOffset bobP;
  LabOffset bobQ0;
  LabOffset bobQ1;
};

struct Geometry {
  Event p;
  Event q0;
  Event q1;
  LabOffsets offsets;
  // Bob's laboratory anchor events: P', Q'_0, Q'_1.
  Event bobP;
  Event bobQ0;
  Event bobQ1;
  // Static worldline on which Bob compares the two unveilings.
  Vec3 comparisonPosition;

  const Event& wing(int i) const { return i == 0 ? q0 : q1; }
  const Event& bobWing(int i) const { return i == 0 ? bobQ0 : bobQ1; }
};

inline Geometry standardGeometry(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("x", "must be a positive finite real");
  Geometry g;
  g.p = {0.0, 0.0, 0.0, 0.0};
  g.q0 = {x, 0.0, 0.0, x};
  g.q1 = {-x, 0.0, 0.0, x};
  g.bobP = g.p;
  g.bobQ0 = g.q0;
  g.bobQ1 = g.q1;
  return g;
}

namespace detail {

inline void checkOffset(const LabOffset& o, const std::string& name) {
  const auto& d = o.displacement;
  if (!std::isfinite(d.x) || !std::isfinite(d.y) || !std::isfinite(d.z) || !std::isfinite(o.delay))
    throw ConfigError(name, "offset must be finite");
  if (o.delay < 0.0) throw ConfigError(name, "delay must be non-negative");
}

inline Event displaced(const Event& e, const LabOffset& o, double sign) {
  return {e.x + o.displacement.x, e.y + o.displacement.y, e.z + o.displacement.z,
          e.t + sign * o.delay};
}

}  // namespace detail

// Non-ideal layout: Bob's labs sit near, but not at, P, Q_0 and Q_1. Each
// unveiling lab must be in the causal future of its Q_i. The preparation
// lab is not checked here; an unreachable P' surfaces when the qubit batch
// is scheduled.
inline Geometry offsetGeometry(double x, const LabOffsets& offsets) {
  Geometry g = standardGeometry(x);
  detail::checkOffset(offsets.bobP, "offset-p");
  detail::checkOffset(offsets.bobQ0, "offset-q0");
  detail::checkOffset(offsets.bobQ1, "offset-q1");
  g.offsets = offsets;
  g.bobP = detail::displaced(g.p, offsets.bobP, -1.0);
  g.bobQ0 = detail::displaced(g.q0, offsets.bobQ0, +1.0);
  g.bobQ1 = detail::displaced(g.q1, offsets.bobQ1, +1.0);
  if (!causallyPrecedes(g.q0, g.bobQ0))
    throw ConfigError("offset-q0", "Q'0 is not in the causal future of Q0");
  if (!causallyPrecedes(g.q1, g.bobQ1))
    throw ConfigError("offset-q1", "Q'1 is not in the causal future of Q1");
  return g;
}

// Supremum T such that (position, T) lies in the past cone of both events.
// A static worldline always meets the common past; only non-finite input
// leaves the intersection empty.
inline double latestBindingTime(const Event& q0B, const Event& q1B, const Vec3& position) {
  const double t0 = q0B.t - distance(position, q0B.position());
  const double t1 = q1B.t - distance(position, q1B.position());
  const double latest = std::min(t0, t1);
  if (!std::isfinite(latest))
    throw Error("latestBindingTime: past cones do not meet the worldline");
  return latest;
}

// Earliest event on a static worldline lying in the future cone of both.
inline Event earliestJointFuture(const Event& a, const Event& b, const Vec3& position) {
  const double ta = a.t + distance(position, a.position());
  const double tb = b.t + distance(position, b.position());
  return Event::at(position, std::max(ta, tb));
}

// Earliest light-speed arrival at a static position, not before `notBefore`.
inline Event lightlikeArrival(const Event& emission, const Vec3& position, double notBefore) {
  return Event::at(position, std::max(emission.t + distance(emission.position(), position), notBefore));
}

}  // namespace rqbc
