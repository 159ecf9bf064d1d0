#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rqbc/adversary.hpp"
#include "rqbc/analysis.hpp"

namespace rqbc::csv {

// Six significant digits in plain decimal notation (no exponent).
inline std::string sig6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  // Round to six significant digits first so a carry moves the exponent.
  char sci[32];
  std::snprintf(sci, sizeof sci, "%.5e", v);
  const double rounded = std::strtod(sci, nullptr);
  const int exponent = std::atoi(std::strchr(sci, 'e') + 1);
  const int decimals = std::max(0, 5 - exponent);
  std::string out(static_cast<std::size_t>(decimals) + 32 + static_cast<std::size_t>(std::max(0, exponent)), '\0');
  const int len = std::snprintf(out.data(), out.size(), "%.*f", decimals, rounded);
  out.resize(static_cast<std::size_t>(len));
  return out;
}

inline std::string attackHeader() { return "strategy,theta,N,trials,successes,rate,lo,hi,p0Hat,p1Hat,deltaHat"; }

inline std::string attackRow(const AttackReport& r) {
  std::string row = r.strategy + ",";
  if (r.theta) row += sig6(*r.theta);
  row += "," + std::to_string(r.N) + "," + std::to_string(r.trials) + "," + std::to_string(r.successes) + "," +
         sig6(r.successRate) + "," + sig6(r.wilson.lo) + "," + sig6(r.wilson.hi) + "," + sig6(r.p0Hat) + "," +
         sig6(r.p1Hat) + "," + sig6(r.deltaHat);
  return row;
}

inline std::string sweepHeader() { return "N,theta,analyticPerQubit,monteCarloPerQubit,analyticDual,dualRate"; }

inline std::string sweepRow(std::size_t n, const SweepRow& r) {
  return std::to_string(n) + "," + sig6(r.theta) + "," + sig6(r.analyticPerQubit) + "," +
         sig6(r.monteCarloPerQubit) + "," + sig6(r.analyticDual) + "," + sig6(r.dualRate);
}

inline std::string planHeader() {
  return "N,e,eta,tauAccept,rhoReject,completenessFailureProb,abortProb,sameFailProb,conjFailProb,"
         "strictSoundnessBound,thresholdAttackRate";
}

inline std::string planRow(const ThresholdPlan& p) {
  return std::to_string(p.N) + "," + sig6(p.e) + "," + sig6(p.eta) + "," + sig6(p.tauAccept) + "," +
         sig6(p.rhoReject) + "," + sig6(p.completenessFailureProb) + "," + sig6(p.breakdown.abortProb) + "," +
         sig6(p.breakdown.sameFailProb) + "," + sig6(p.breakdown.conjFailProb) + "," +
         sig6(p.strictSoundnessBound) + "," + sig6(p.thresholdAttackRate);
}

inline std::string soundnessHeader() { return "N,rate,perRelevantBound,perTransmittedBound"; }

inline std::string soundnessRow(const SoundnessRow& r, double rate) {
  return std::to_string(r.N) + "," + sig6(rate) + "," + sig6(r.perRelevantBound) + "," +
         sig6(r.perTransmittedBound);
}

// Appends rows to `path`, writing `header` first when the file is new or empty.
inline void append(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  bool needHeader = true;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) needHeader = false;
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (needHeader) out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
}

}  // namespace rqbc::csv
