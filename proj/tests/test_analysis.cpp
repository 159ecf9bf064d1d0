#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "oracles.hpp"
#include "rqbc/analysis.hpp"
#include "rqbc/csv.hpp"
#include "rqbc/random.hpp"

using namespace rqbc;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big bigTail(unsigned n, unsigned k, double pd) {
  const Big p(pd), q = Big(1) - p;
  Big sum = 0, term = pow(q, n);  // C(n, j) p^j q^(n-j)
  for (unsigned j = 0; j <= n; ++j) {
    if (j >= k) sum += term;
    term = term * (n - j) / (j + 1) * p / q;
  }
  return sum;
}

// Non-acceptance probability of an honest run by brute force over the basis
// draw, detections and noise of every qubit. Tracks (same, conj, sameErr,
// conjMatch) counts.
double enumeratedFailure(unsigned n, double e, double eta, double tau, double rho, std::size_t minCount) {
  double fail = 0.0;
  // Each qubit: undetected (1-eta); same basis (eta/2) with error e; conj (eta/2) with mismatch 1/2.
  struct Branch {
    int kind;  // 0 undetected, 1 same ok, 2 same err, 3 conj match, 4 conj mismatch
    double w;
  };
  const Branch branches[5] = {{0, 1 - eta}, {1, eta / 2 * (1 - e)}, {2, eta / 2 * e}, {3, eta / 4}, {4, eta / 4}};
  std::vector<int> choice(n, 0);
  while (true) {
    double w = 1.0;
    std::size_t same = 0, sameErr = 0, conj = 0, conjMis = 0;
    for (unsigned i = 0; i < n; ++i) {
      const auto& b = branches[choice[i]];
      w *= b.w;
      if (b.kind == 1 || b.kind == 2) ++same;
      if (b.kind == 2) ++sameErr;
      if (b.kind == 3 || b.kind == 4) ++conj;
      if (b.kind == 4) ++conjMis;
    }
    bool accept = same >= minCount && conj >= minCount;
    if (accept) {
      accept = (same == 0 ? 0.0 : double(sameErr) / double(same)) <= tau;
      accept = accept && conj > 0 && double(conjMis) / double(conj) >= rho;
    }
    if (!accept) fail += w;
    unsigned i = 0;
    while (i < n && ++choice[i] == 5) choice[i++] = 0;
    if (i == n) break;
  }
  return fail;
}

}  // namespace

TEST(BinomialTail, Examples) {
  EXPECT_DOUBLE_EQ(binomialTail(2, 1, 0.5), 0.75);
  EXPECT_EQ(binomialTail(10, 0, 0.3), 1.0);
  EXPECT_LT(binomialTail(500, 75, 0.05), 1e-6);
  EXPECT_GT(binomialTail(500, 75, 0.05), 0.0);
  EXPECT_THROW(binomialTail(3, 4, 0.5), ConfigError);
  EXPECT_THROW(binomialTail(3, 1, 1.5), ConfigError);
  EXPECT_EQ(binomialTail(5, 1, 0.0), 0.0);
  EXPECT_EQ(binomialTail(5, 5, 1.0), 1.0);
}

TEST(BinomialTail, MatchesArbitraryPrecisionReference) {
  for (unsigned n : {1u, 7u, 50u, 200u, 500u, 1000u})
    for (double p : {0.001, 0.05, 0.3, 0.5, 0.853553, 0.99})
      for (unsigned k = 0; k <= n; k += std::max(1u, n / 13)) {
        const double ref = static_cast<double>(bigTail(n, k, p));
        const double got = binomialTail(n, k, p);
        if (ref < 1e-300) continue;
        EXPECT_NEAR(got, ref, 1e-12 * ref) << "n " << n << " k " << k << " p " << p;
        const double cdfRef = k == 0 ? 0.0 : 1.0 - ref;
        if (k > 0 && cdfRef > 1e-3) {
          EXPECT_NEAR(binomialCdf(n, k - 1, p), cdfRef, 1e-12 * cdfRef);
        }
      }
}

TEST(BinomialTail, AgreesWithMonteCarlo) {
  Rng rng = makeRng(kDefaultSeed, 90);
  const int runs = 20000;
  for (unsigned n : {5u, 20u, 50u})
    for (double p : {0.1, 0.5, 0.8}) {
      const unsigned k = static_cast<unsigned>(n * p);
      int hits = 0;
      for (int r = 0; r < runs; ++r) {
        unsigned x = 0;
        for (unsigned i = 0; i < n; ++i) x += bernoulli(rng, p);
        hits += x >= k;
      }
      const double exact = binomialTail(n, k, p);
      const double sigma = std::sqrt(exact * (1 - exact) / runs);
      EXPECT_LE(std::abs(hits / double(runs) - exact), 3 * sigma + 1e-12) << n << " " << p;
    }
}

TEST(Wilson, ContainsRateAndShrinks) {
  for (std::size_t s : {0u, 1u, 42u, 999u, 1000u}) {
    const Interval w = wilsonInterval(s, 1000);
    EXPECT_LE(w.lo, s / 1000.0);
    EXPECT_GE(w.hi, s / 1000.0);
    EXPECT_GE(w.lo, 0.0);
    EXPECT_LE(w.hi, 1.0);
  }
  const Interval a = wilsonInterval(50, 100), b = wilsonInterval(5000, 10000);
  EXPECT_LT(b.hi - b.lo, a.hi - a.lo);
}

TEST(Thresholds, IntegerCutoffsMatchFractions) {
  for (std::size_t c = 1; c < 300; ++c)
    for (double t : {0.0, 0.1, 0.15, 0.3, 0.33, 0.49}) {
      const std::size_t m = maxAllowedMismatches(c, t);
      EXPECT_LE(double(m) / double(c), t);
      if (m < c) {
        EXPECT_GT(double(m + 1) / double(c), t);
      }
      const std::size_t r = minRequiredMismatches(c, t);
      if (r <= c) {
        EXPECT_GE(double(r) / double(c), t);
      }
      if (r > 0) {
        EXPECT_LT(double(r - 1) / double(c), t);
      }
    }
}

TEST(CompletenessFailure, MatchesExhaustiveEnumeration) {
  for (double eta : {1.0, 0.7})
    for (double e : {0.0, 0.05, 0.2})
      for (double tau : {0.0, 0.2, 0.34}) {
        const double rho = (tau + 0.5) / 2;
        const auto b = completenessFailure(6, e, eta, tau, rho, 1);
        EXPECT_NEAR(b.failureProb, enumeratedFailure(6, e, eta, tau, rho, 1), 1e-12)
            << "eta " << eta << " e " << e << " tau " << tau;
      }
}

TEST(PlanThresholds, Examples) {
  const ThresholdPlan p = planThresholds(1000, 0.05, 1.0, 0.99);
  EXPECT_LE(p.tauAccept, 0.15);
  EXPECT_LT(p.completenessFailureProb, 0.01);
  const ThresholdPlan z = planThresholds(1000, 0.0, 1.0, 0.99);
  EXPECT_EQ(z.tauAccept, 0.0);
  EXPECT_EQ(z.breakdown.sameFailProb, 0.0);
  EXPECT_LT(z.completenessFailureProb, 1e-12);
  EXPECT_THROW(planThresholds(4, 0.05, 1.0, 0.999999), InfeasibleTarget);
  EXPECT_THROW(planThresholds(10, 0.05, 1.0, 1.0), ConfigError);
}

TEST(PlanThresholds, TinyNInfeasibleByEnumeration) {
  // Even without a minimum count, four qubits cannot reach 1 - 1e-6.
  double best = 1.0;
  for (int i = 0; i < 50; ++i) {
    const double tau = i / 100.0;
    best = std::min(best, enumeratedFailure(4, 0.05, 1.0, tau, (tau + 0.5) / 2, 1));
  }
  EXPECT_GT(best, 1e-6);
  EXPECT_THROW(planThresholds(4, 0.05, 1.0, 0.999999, 1), InfeasibleTarget);
}

TEST(PlanThresholds, OrderingInvariant) {
  for (std::size_t n : {100u, 300u, 1000u})
    for (double e : {0.0, 0.01, 0.05, 0.1})
      for (double eta : {0.5, 1.0}) {
        try {
          const auto p = planThresholds(n, e, eta, 0.99);
          EXPECT_LT(p.tauAccept, p.rhoReject);
          EXPECT_LT(p.rhoReject, 0.5);
          EXPECT_GE(p.tauAccept, 0.0);
          EXPECT_LE(p.completenessFailureProb, 0.01);
        } catch (const InfeasibleTarget&) {
        }
      }
}

TEST(SoundnessCurve, Examples) {
  const auto rows = soundnessCurve({20, 0, 10, 20}, 0.853553);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].N, 0u);
  EXPECT_EQ(rows[0].perTransmittedBound, 1.0);
  EXPECT_EQ(rows[0].perRelevantBound, 1.0);
  EXPECT_NEAR(rows[2].perTransmittedBound, 0.0421, 5e-5);
  EXPECT_NEAR(soundnessCurve({10}, 0.5)[0].perTransmittedBound, 9.766e-4, 5e-7);
  EXPECT_THROW(soundnessCurve({1}, 1.0), ConfigError);
  const auto many = soundnessCurve({1, 2, 5, 10, 50, 100}, kIntermediateRate);
  for (std::size_t i = 1; i < many.size(); ++i) {
    EXPECT_LT(many[i].perTransmittedBound, many[i - 1].perTransmittedBound);
    EXPECT_GE(many[i].perRelevantBound, many[i].perTransmittedBound);
  }
}

TEST(Csv, SixSignificantDigits) {
  EXPECT_EQ(csv::sig6(0.0421), "0.0421000");
  EXPECT_EQ(csv::sig6(0.853553390593), "0.853553");
  EXPECT_EQ(csv::sig6(45.0), "45.0000");
  EXPECT_EQ(csv::sig6(0.9999996), "1.00000");
  EXPECT_EQ(csv::sig6(1234567.0), "1234570");
  EXPECT_EQ(csv::sig6(0.0), "0");
}
