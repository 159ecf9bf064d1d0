#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "rqbc/errors.hpp"
#include "rqbc/random.hpp"

namespace rqbc {

// Bits are stored one per byte, value 0 or 1.
using Bit = std::uint8_t;
using BitString = std::vector<Bit>;

enum class Basis : std::uint8_t { Z, X };

constexpr Basis conjugate(Basis b) noexcept { return b == Basis::Z ? Basis::X : Basis::Z; }

// Honest commitment to bit 0 measures in Z, to bit 1 in X.
constexpr Basis basisForBit(Bit b) noexcept { return b == 0 ? Basis::Z : Basis::X; }

constexpr char basisName(Basis b) noexcept { return b == Basis::Z ? 'Z' : 'X'; }

// Measurement angle of the honest basis on the X-Z Bloch circle.
constexpr double basisAngle(Basis b) noexcept { return b == Basis::Z ? 0.0 : 90.0; }

// One of |0>, |1>, |+>, |->.
struct BB84State {
  Basis basis = Basis::Z;
  Bit bit = 0;

  // |0> = 0, |+> = 90, |1> = 180, |-> = 270 degrees.
  constexpr double blochAngle() const noexcept { return basisAngle(basis) + (bit ? 180.0 : 0.0); }

  friend bool operator==(const BB84State&, const BB84State&) = default;
};

struct QubitRecord {
  std::size_t index = 0;
  BB84State prepared;
  bool detected = false;
  std::optional<Bit> honestOutcome;  // set only when detected
};

inline std::vector<BB84State> randomBB84(std::size_t n, Rng& rng) {
  if (n == 0) throw ConfigError("N", "at least one qubit is required");
  std::vector<BB84State> states(n);
  for (auto& s : states) {
    const auto draw = rng() >> 62;  // two uniform bits
    s.basis = (draw & 2u) ? Basis::X : Basis::Z;
    s.bit = static_cast<Bit>(draw & 1u);
  }
  return states;
}

inline double probabilityOfZero(const BB84State& state, double measurementAngleDeg) {
  const double delta = (state.blochAngle() - measurementAngleDeg) * std::numbers::pi / 180.0;
  return 0.5 * (1.0 + std::cos(delta));
}

// Projective measurement along the axis at `measurementAngleDeg`. Outcome 0
// is the eigenvector at that angle, outcome 1 its antipode.
inline Bit measureProjective(const BB84State& state, double measurementAngleDeg, Rng& rng) {
  return bernoulli(rng, probabilityOfZero(state, measurementAngleDeg)) ? Bit{0} : Bit{1};
}

inline void checkNoiseRate(double e) {
  if (!(e >= 0.0 && e < 0.5)) throw ConfigError("e", "noise rate must lie in [0, 0.5)");
}

inline void checkEfficiency(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta", "detection efficiency must lie in (0, 1]");
}

// Flips with probability e. Always consumes one draw.
inline Bit applyNoise(Bit outcome, double e, Rng& rng) {
  checkNoiseRate(e);
  const bool flip = bernoulli(rng, e);
  return flip ? static_cast<Bit>(outcome ^ 1u) : outcome;
}

inline BitString sampleDetection(std::size_t n, double eta, Rng& rng) {
  checkEfficiency(eta);
  BitString flags(n);
  for (auto& f : flags) f = bernoulli(rng, eta) ? 1 : 0;
  return flags;
}

}  // namespace rqbc
