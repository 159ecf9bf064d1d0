#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rqbc/errors.hpp"
#include "rqbc/qubits.hpp"

namespace rqbc {

// Per-qubit success of the 45-degree intermediate measurement,
// (1 + cos 45deg) / 2. Optimal among single-angle projective strategies;
// not claimed optimal over general measurements.
inline const double kIntermediateRate = 0.5 * (1.0 + std::cos(std::numbers::pi / 4.0));

// ---------------------------------------------------------------------------
// Binomial distribution
// ---------------------------------------------------------------------------

namespace binomial_detail {

inline long double logPmf(std::size_t n, std::size_t k, long double p) {
  const long double nn = static_cast<long double>(n);
  const long double kk = static_cast<long double>(k);
  return std::lgamma(nn + 1.0L) - std::lgamma(kk + 1.0L) - std::lgamma(nn - kk + 1.0L) + kk * std::log(p) +
         (nn - kk) * std::log1p(-p);
}

// P[lo <= X <= hi] for 0 < p < 1. Sums outward from the largest term in
// range so every ratio is at most 1 and nothing overflows.
inline double rangeProbability(std::size_t n, std::size_t lo, std::size_t hi, long double p) {
  const long double q = 1.0L - p;
  std::size_t mode = static_cast<std::size_t>(std::floor((static_cast<long double>(n) + 1.0L) * p));
  if (mode > n) mode = n;
  const std::size_t peak = std::clamp(mode, lo, hi);
  long double sum = 1.0L;
  long double term = 1.0L;
  for (std::size_t j = peak; j < hi; ++j) {
    term *= (static_cast<long double>(n - j) / static_cast<long double>(j + 1)) * (p / q);
    if (term == 0.0L) break;
    sum += term;
  }
  term = 1.0L;
  for (std::size_t j = peak; j > lo; --j) {
    term *= (static_cast<long double>(j) / static_cast<long double>(n - j + 1)) * (q / p);
    if (term == 0.0L) break;
    sum += term;
  }
  return static_cast<double>(std::exp(logPmf(n, peak, p)) * sum);
}

inline void checkArgs(std::size_t n, std::size_t k, double p) {
  if (k > n) throw ConfigError("k", "must not exceed n");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p", "must lie in [0, 1]");
}

}  // namespace binomial_detail

// P[X >= k] for X ~ Binomial(n, p).
inline double binomialTail(std::size_t n, std::size_t k, double p) {
  binomial_detail::checkArgs(n, k, p);
  if (k == 0) return 1.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return std::min(1.0, binomial_detail::rangeProbability(n, k, n, p));
}

// P[X <= k].
inline double binomialCdf(std::size_t n, std::size_t k, double p) {
  binomial_detail::checkArgs(n, k, p);
  if (k == n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return std::min(1.0, binomial_detail::rangeProbability(n, 0, k, p));
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval; z = 1.96 gives 95% coverage.
inline Interval wilsonInterval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, std::min(phat, centre - half)), std::min(1.0, std::max(phat, centre + half))};
}

// ---------------------------------------------------------------------------
// Verifier thresholds as integer cut-offs
// ---------------------------------------------------------------------------

// Largest m with m/count <= tau, evaluated exactly as the verifier does.
inline std::size_t maxAllowedMismatches(std::size_t count, double tau) {
  if (count == 0) return 0;
  const double c = static_cast<double>(count);
  auto m = static_cast<std::size_t>(std::min(c, std::floor(tau * c) + 1.0));
  while (m > 0 && static_cast<double>(m) / c > tau) --m;
  return m;
}

// Smallest m with m/count >= rho; count + 1 if none.
inline std::size_t minRequiredMismatches(std::size_t count, double rho) {
  if (count == 0) return 1;
  const double c = static_cast<double>(count);
  auto m = static_cast<std::size_t>(std::max(0.0, std::ceil(rho * c) - 1.0));
  while (m <= count && static_cast<double>(m) / c < rho) ++m;
  return m;
}

// ---------------------------------------------------------------------------
// Honest completeness
// ---------------------------------------------------------------------------

struct CompletenessBreakdown {
  double abortProb = 0.0;     // too few qubits in a basis
  double sameFailProb = 0.0;  // claimed-basis mismatch rate above tauAccept
  double conjFailProb = 0.0;  // conjugate mismatch rate below rhoReject
  double failureProb = 0.0;   // honest run not accepted
};

namespace completeness_detail {

// Log-probability that k detected qubits match the claimed basis and c the
// conjugate one: each qubit lands in either class with eta/2.
class SplitWeights {
 public:
  SplitWeights(std::size_t n, double eta) : n_(n), eta_(eta), logFact_(n + 1) {
    for (std::size_t i = 0; i <= n; ++i) logFact_[i] = std::lgamma(static_cast<long double>(i) + 1.0L);
  }

  double operator()(std::size_t k, std::size_t c) const {
    const std::size_t d = k + c;
    if (eta_ == 1.0) {
      if (d != n_) return 0.0;
      return static_cast<double>(std::exp(logFact_[n_] - logFact_[k] - logFact_[c] - static_cast<long double>(n_) * std::log(2.0L)));
    }
    const long double half = std::log(static_cast<long double>(eta_) / 2.0L);
    const long double miss = std::log1p(-static_cast<long double>(eta_));
    const long double lw = logFact_[n_] - logFact_[k] - logFact_[c] - logFact_[n_ - d] +
                           static_cast<long double>(d) * half + static_cast<long double>(n_ - d) * miss;
    return static_cast<double>(std::exp(lw));
  }

 private:
  std::size_t n_;
  double eta_;
  std::vector<long double> logFact_;
};

// Non-vanishing (k, c, weight) cells of the split distribution.
struct SplitCell {
  std::size_t k;
  std::size_t c;
  double w;
};

inline std::vector<SplitCell> splitTable(std::size_t n, double eta) {
  SplitWeights weight(n, eta);
  std::vector<SplitCell> cells;
  for (std::size_t k = 0; k <= n; ++k)
    for (std::size_t c = eta == 1.0 ? n - k : 0; c + k <= n; ++c)
      if (const double w = weight(k, c); w > 0.0) cells.push_back({k, c, w});
  return cells;
}

inline CompletenessBreakdown failureOver(std::span<const SplitCell> cells, std::size_t n, double e, double tauAccept,
                                         double rhoReject, std::size_t minCount) {
  std::vector<double> sameFail(n + 1), conjFail(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const std::size_t allowed = maxAllowedMismatches(k, tauAccept);
    sameFail[k] = allowed >= k ? 0.0 : binomialTail(k, allowed + 1, e);
    const std::size_t needed = minRequiredMismatches(k, rhoReject);
    conjFail[k] = k == 0 ? 1.0 : needed == 0 ? 0.0 : needed > k ? 1.0 : binomialCdf(k, needed - 1, 0.5);
  }
  CompletenessBreakdown out;
  for (const auto& [k, c, w] : cells) {
    if (k < minCount || c < minCount) {
      out.abortProb += w;
      continue;
    }
    out.sameFailProb += w * sameFail[k];
    out.conjFailProb += w * conjFail[c];
    out.failureProb += w * (sameFail[k] + conjFail[c] - sameFail[k] * conjFail[c]);
  }
  out.failureProb += out.abortProb;
  out.failureProb = std::min(1.0, out.failureProb);
  return out;
}

}  // namespace completeness_detail

// Exact probability that an honest run is not accepted, splitting the
// random same/conjugate basis counts over detection and the basis draw.
inline CompletenessBreakdown completenessFailure(std::size_t n, double e, double eta, double tauAccept,
                                                 double rhoReject, std::size_t minCount) {
  checkNoiseRate(e);
  checkEfficiency(eta);
  const auto cells = completeness_detail::splitTable(n, eta);
  return completeness_detail::failureOver(cells, n, e, tauAccept, rhoReject, minCount);
}

// ---------------------------------------------------------------------------
// Threshold planning
// ---------------------------------------------------------------------------

struct ThresholdPlan {
  std::size_t N = 0;
  double e = 0.0;
  double eta = 1.0;
  double tauAccept = 0.0;
  double rhoReject = 0.0;
  double completenessFailureProb = 0.0;
  CompletenessBreakdown breakdown;
  // kIntermediateRate raised to the expected claimed-basis count N*eta/2.
  double strictSoundnessBound = 0.0;
  // Success of the 45-degree attack when each wing may carry up to
  // tauAccept mismatches on its claimed basis (conjugate check ignored).
  double thresholdAttackRate = 0.0;
};

// Probability that the 45-degree strategy passes both wings' claimed-basis
// checks at threshold tau.
inline double thresholdAttackRate(std::size_t n, double eta, double tau, double perQubit = kIntermediateRate) {
  std::vector<double> pass(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const std::size_t allowed = maxAllowedMismatches(k, tau);
    pass[k] = binomialCdf(k, std::min(allowed, k), 1.0 - perQubit);
  }
  completeness_detail::SplitWeights weight(n, eta);
  double total = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    for (std::size_t c = eta == 1.0 ? n - k : 0; c + k <= n; ++c) total += weight(k, c) * pass[k] * pass[c];
  return std::min(1.0, total);
}

inline ThresholdPlan planThresholds(std::size_t n, double e, double eta, double targetCompleteness,
                                    std::size_t minCount = 16) {
  if (n < 1) throw ConfigError("N", "security parameter must be at least 1");
  if (!(targetCompleteness > 0.0 && targetCompleteness < 1.0))
    throw ConfigError("target", "completeness target must lie in (0, 1)");
  checkNoiseRate(e);
  checkEfficiency(eta);
  const double budget = 1.0 - targetCompleteness;
  const auto cells = completeness_detail::splitTable(n, eta);
  double best = 1.0;
  for (int i = 0; i < 50; ++i) {
    const double tau = i / 100.0;
    const double rho = 0.5 * (tau + 0.5);
    const auto b = completeness_detail::failureOver(cells, n, e, tau, rho, minCount);
    best = std::min(best, b.failureProb);
    if (b.failureProb > budget) continue;
    ThresholdPlan plan;
    plan.N = n;
    plan.e = e;
    plan.eta = eta;
    plan.tauAccept = tau;
    plan.rhoReject = rho;
    plan.breakdown = b;
    plan.completenessFailureProb = b.failureProb;
    plan.strictSoundnessBound = std::pow(kIntermediateRate, static_cast<double>(n) * eta / 2.0);
    plan.thresholdAttackRate = thresholdAttackRate(n, eta, tau);
    return plan;
  }
  throw InfeasibleTarget("no tauAccept below 0.5 reaches completeness " + std::to_string(targetCompleteness) +
                         " at N = " + std::to_string(n) + " (best failure probability " + std::to_string(best) + ")");
}

// ---------------------------------------------------------------------------
// Soundness curves
// ---------------------------------------------------------------------------

struct SoundnessRow {
  std::size_t N = 0;
  double perRelevantBound = 1.0;     // rate^(N/2): claimed-basis qubits only
  double perTransmittedBound = 1.0;  // rate^N: every transmitted qubit
};

inline std::vector<SoundnessRow> soundnessCurve(std::vector<std::size_t> ns, double perQubitRate) {
  if (!(perQubitRate > 0.0 && perQubitRate < 1.0)) throw ConfigError("rate", "must lie in (0, 1)");
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<SoundnessRow> rows;
  rows.reserve(ns.size());
  for (std::size_t n : ns) {
    const double nn = static_cast<double>(n);
    rows.push_back({n, std::pow(perQubitRate, nn / 2.0), std::pow(perQubitRate, nn)});
  }
  return rows;
}

}  // namespace rqbc
