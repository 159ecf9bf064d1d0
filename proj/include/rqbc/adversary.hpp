#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rqbc/analysis.hpp"
#include "rqbc/channels.hpp"
#include "rqbc/errors.hpp"
#include "rqbc/protocol.hpp"
#include "rqbc/qubits.hpp"
#include "rqbc/random.hpp"
#include "rqbc/sched.hpp"

namespace rqbc {

// ---------------------------------------------------------------------------
// Strategies
//
// A cheating Alice measures every detected qubit at most once at P, with a
// single angle shared by both wings, then relays the record to Q_0 and Q_1.
// Each wing turns the record into declarations for its own claimed bit
// (0 at Q_0, 1 at Q_1) using only that record and wing-private randomness.
// ---------------------------------------------------------------------------

enum class WingRuleKind : std::uint8_t { BlindGuess, FixedBasis, ProjectiveAngle };

struct WingRule {
  WingRuleKind kind = WingRuleKind::BlindGuess;
  Basis basis = Basis::Z;  // FixedBasis
  double theta = 0.0;      // ProjectiveAngle, degrees

  static WingRule blindGuess() { return {}; }
  static WingRule fixedBasis(Basis b) { return {WingRuleKind::FixedBasis, b, 0.0}; }
  static WingRule projectiveAngle(double thetaDeg) {
    if (!(thetaDeg >= 0.0 && thetaDeg <= 90.0)) throw ConfigError("theta", "must lie in [0, 90] degrees");
    return {WingRuleKind::ProjectiveAngle, Basis::Z, thetaDeg};
  }

  // Angle this rule needs measured at P; none for blind guessing.
  std::optional<double> measurementAngle() const {
    switch (kind) {
      case WingRuleKind::BlindGuess: return std::nullopt;
      case WingRuleKind::FixedBasis: return basisAngle(basis);
      case WingRuleKind::ProjectiveAngle: return theta;
    }
    return std::nullopt;
  }

  std::string name() const {
    switch (kind) {
      case WingRuleKind::BlindGuess: return "blindGuess";
      case WingRuleKind::FixedBasis: return std::string("fixedBasis(") + basisName(basis) + ")";
      case WingRuleKind::ProjectiveAngle: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "projectiveAngle(%g)", theta);
        return buf;
      }
    }
    return "?";
  }
};

enum class StrategyKind : std::uint8_t { BlindGuess, FixedBasis, ProjectiveAngle, PerWingPair };

class AttackStrategy {
 public:
  static AttackStrategy blindGuess() { return {StrategyKind::BlindGuess, WingRule::blindGuess(), WingRule::blindGuess()}; }
  static AttackStrategy fixedBasis(Basis b) {
    return {StrategyKind::FixedBasis, WingRule::fixedBasis(b), WingRule::fixedBasis(b)};
  }
  static AttackStrategy projectiveAngle(double thetaDeg) {
    const auto r = WingRule::projectiveAngle(thetaDeg);
    return {StrategyKind::ProjectiveAngle, r, r};
  }
  // Rejects pairs whose members would need two different measurements of
  // the same qubit.
  static AttackStrategy perWingPair(WingRule s0, WingRule s1) {
    const auto a0 = s0.measurementAngle();
    const auto a1 = s1.measurementAngle();
    if (a0 && a1 && std::abs(*a0 - *a1) > 1e-12)
      throw ConfigError("strategy", "perWingPair(" + s0.name() + ", " + s1.name() +
                                        ") needs a second measurement of each qubit");
    return {StrategyKind::PerWingPair, s0, s1};
  }

  StrategyKind kind() const noexcept { return kind_; }
  const WingRule& wing(int i) const noexcept { return rules_[i]; }

  std::optional<double> measurementAngle() const {
    if (auto a = rules_[0].measurementAngle()) return a;
    return rules_[1].measurementAngle();
  }

  std::string name() const {
    switch (kind_) {
      case StrategyKind::BlindGuess: return "blindGuess";
      case StrategyKind::FixedBasis: return rules_[0].name();
      case StrategyKind::ProjectiveAngle: return "projectiveAngle";
      case StrategyKind::PerWingPair: return "perWingPair(" + rules_[0].name() + "|" + rules_[1].name() + ")";
    }
    return "?";
  }

 private:
  AttackStrategy(StrategyKind k, WingRule r0, WingRule r1) : kind_(k), rules_{r0, r1} {}

  StrategyKind kind_;
  std::array<WingRule, 2> rules_;
};

// Closed-form probability that the wing checking basis `b` declares a
// prepared bit of that basis correctly under `rule`, measured at `angle`.
inline double ruleCorrectProbability(const WingRule& rule, std::optional<double> angle, Basis b, double e) {
  if (rule.kind == WingRuleKind::BlindGuess || !angle) return 0.5;
  const double delta = (basisAngle(b) - *angle) * std::numbers::pi / 180.0;
  const double c = 0.5 * (1.0 + std::cos(delta));
  return c * (1.0 - e) + (1.0 - c) * e;
}

// Probability that the wing whose claimed basis matches a detected qubit's
// preparation declares it correctly, averaged over the four states.
inline double analyticPerQubitRate(const AttackStrategy& s, double e = 0.0) {
  const auto angle = s.measurementAngle();
  return 0.5 * (ruleCorrectProbability(s.wing(0), angle, Basis::Z, e) +
                ruleCorrectProbability(s.wing(1), angle, Basis::X, e));
}

// Strict dual-unveiling success: every detected qubit correct on its wing.
inline double analyticStrictSuccess(const AttackStrategy& s, std::size_t n, double eta = 1.0, double e = 0.0) {
  return std::pow(1.0 - eta + eta * analyticPerQubitRate(s, e), static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// One attack run
// ---------------------------------------------------------------------------

// Declarations of one wing. Sees the relayed record and its own random
// source, nothing from the other wing.
inline BitString declareWing(const WingRule& rule, const OutcomeReport& record, Rng& wingRng) {
  BitString out(record.outcomes.size());
  if (rule.kind == WingRuleKind::BlindGuess) {
    for (auto& b : out) b = randomBit(wingRng);
  } else {
    out = record.outcomes;
  }
  return out;
}

struct AttackHooks {
  // Applied to the ciphertext relayed toward `wing` before it is sent.
  std::function<void(int wing, BitString& ciphertext)> tamperRelay;
  // Replaces the wing-private seed.
  std::array<std::optional<std::uint64_t>, 2> wingSeed;
};

struct AttackOutcome {
  std::vector<QubitRecord> records;
  BitString detected;
  std::array<WingUnveiling, 2> unveilings;
  std::array<bool, 2> strictPass{};
  std::array<bool, 2> verifierPass{};
  std::size_t relevantQubits = 0;
  std::size_t relevantCorrect = 0;
  std::vector<Message> messages;

  bool strictSuccess() const { return strictPass[0] && strictPass[1]; }
  bool verifierSuccess() const { return verifierPass[0] && verifierPass[1]; }
};

namespace adversary_detail {

inline bool strictWingPass(std::span<const QubitRecord> records, const OutcomeReport& r, int wing) {
  const auto t = tallyBasis(records, r, basisForBit(static_cast<Bit>(wing)));
  return t && t->mismatches == 0;
}

}  // namespace adversary_detail

// Runs one cheating attempt through the scheduler: claimed bit 0 at Q_0,
// bit 1 at Q_1. Each wing is judged on its own: the strict game requires
// exact agreement on the claimed basis; the verifier game applies the full
// single-wing checks of bobVerify at the configured thresholds.
inline AttackOutcome executeAttack(const AttackStrategy& strategy, const ProtocolConfig& cfg, const Geometry& g,
                                   std::uint64_t seed, const AttackHooks& hooks = {}) {
  cfg.validate();
  AttackOutcome out;
  Rng prepRng = makeRng(seed, kStreamPrepare);
  Rng padRng = makeRng(seed, kStreamPads);
  Rng aliceRng = makeRng(seed, kStreamAlice);
  std::array<Rng, 2> wingRng = {Rng(hooks.wingSeed[0].value_or(deriveSeed(seed, kStreamWing0))),
                                Rng(hooks.wingSeed[1].value_or(deriveSeed(seed, kStreamWing1)))};

  Preparation prep = bobPrepare(cfg, g, prepRng);
  out.records = std::move(prep.records);
  auto pads = setupPads(cfg, maxEncodedLength(cfg.N), padRng);
  const auto angle = strategy.measurementAngle();

  Scheduler sched;
  const auto anchors = protocolAnchors(g);
  std::array<std::optional<WingUnveiling>, 2> received;

  sched.addAgent(anchors[0], [&](const Message&, Scheduler::Context& ctx) {
    // Single measurement per detected qubit; everything after is classical.
    out.detected = sampleDetection(out.records.size(), cfg.eta, aliceRng);
    BitString outcomes;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      if (!out.detected[i]) continue;
      Bit m = 0;
      if (angle) m = applyNoise(measureProjective(out.records[i].prepared, *angle, aliceRng), cfg.e, aliceRng);
      outcomes.push_back(m);
    }
    const BitString record = encodeOutcomes(0, outcomes, out.detected);
    ctx.send(agentId(AgentRole::BobP), MessageKind::DetectionReport, out.detected);
    for (int w = 0; w < 2; ++w) {
      BitString c = otpEncrypt(pads[w].sender, record);
      if (hooks.tamperRelay) hooks.tamperRelay(w, c);
      ctx.send(agentId(aliceWingRole(w)), MessageKind::OutcomeRelay, std::move(c));
    }
  });
  sched.addAgent(anchors[1], [](const Message&, Scheduler::Context&) {});
  for (int w = 0; w < 2; ++w) {
    sched.addAgent(anchors[2 + w], [&, w](const Message& m, Scheduler::Context& ctx) {
      UnveilResult r = decryptRelay(m.payload, pads[w].receiver);
      BitString payload = std::move(r.plaintext);
      if (!r.malformed) {
        OutcomeReport rec = decodeOutcomes(payload);
        rec.outcomes = declareWing(strategy.wing(w), rec, wingRng[w]);
        rec.claimedBit = static_cast<Bit>(w);
        payload = encodeOutcomes(rec);
      }
      ctx.send(agentId(bobWingRole(w)), MessageKind::Unveil, std::move(payload));
    });
    sched.addAgent(anchors[4 + w], [&, w](const Message& m, Scheduler::Context&) {
      received[w] = WingUnveiling{m.payload, m.reception};
    });
  }
  sched.scheduleMessage(std::move(prep.batch));
  out.messages = sched.run();

  std::array<std::optional<OutcomeReport>, 2> reports;
  for (int w = 0; w < 2; ++w) {
    if (!received[w]) throw RunFailure("attack run ended without an unveiling on wing " + std::to_string(w));
    out.unveilings[w] = *received[w];
    reports[w] = out.unveilings[w].decode();
    const bool onTime = receptionOnTime(out.unveilings[w].reception, g.bobWing(w), g.p, cfg.timingTolerance);
    if (!reports[w] || reports[w]->claimedBit != w || reports[w]->detected != out.detected) continue;
    out.strictPass[w] = onTime && adversary_detail::strictWingPass(out.records, *reports[w], w);
    out.verifierPass[w] = onTime && judgeReport(out.records, *reports[w], cfg).passes();
  }

  // Qubit-level game: the wing checking a qubit's preparation basis.
  if (reports[0] && reports[1] && reports[0]->detected == out.detected && reports[1]->detected == out.detected) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      if (!out.detected[i]) continue;
      const auto& st = out.records[i].prepared;
      const int w = st.basis == Basis::Z ? 0 : 1;
      ++out.relevantQubits;
      if (reports[w]->outcomes[k] == st.bit) ++out.relevantCorrect;
      ++k;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo harness
// ---------------------------------------------------------------------------

struct AttackReport {
  std::string strategy;
  std::optional<double> theta;
  std::size_t N = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;  // strict game
  double successRate = 0.0;
  Interval wilson;
  std::size_t wing0Passes = 0;
  std::size_t wing1Passes = 0;
  double p0Hat = 0.0;
  double p1Hat = 0.0;
  double deltaHat = 0.0;
  std::size_t verifierSuccesses = 0;  // full single-wing checks at cfg thresholds
  double verifierRate = 0.0;
  Interval verifierWilson;
  std::size_t relevantQubits = 0;
  std::size_t relevantCorrect = 0;
  double perQubitRate = 0.0;
  std::size_t auditedMessages = 0;
  std::size_t auditViolations = 0;
};

// Returns true when a delivered message respects causality. Called from
// worker threads; must not touch shared state.
using MessageAudit = std::function<bool(const Message&)>;

struct EstimateOptions {
  unsigned jobs = 1;
  MessageAudit audit;  // defaults to causallyPrecedes
};

inline std::uint64_t trialSeed(std::uint64_t base, std::size_t trial) { return deriveSeed(base, 0x1000 + trial); }

inline AttackReport estimateSuccess(const AttackStrategy& strategy, const ProtocolConfig& cfg, const Geometry& g,
                                    std::size_t trials, std::uint64_t seed, const EstimateOptions& opt = {}) {
  cfg.validate();
  if (trials < 1) throw ConfigError("trials", "must be at least 1");

  struct Partial {
    std::size_t strict = 0, verifier = 0, wing0 = 0, wing1 = 0, relevant = 0, correct = 0, audited = 0, bad = 0;
  };
  const auto work = [&](std::size_t begin, std::size_t end, Partial& p) {
    for (std::size_t t = begin; t < end; ++t) {
      const AttackOutcome o = executeAttack(strategy, cfg, g, trialSeed(seed, t));
      p.strict += o.strictSuccess();
      p.verifier += o.verifierSuccess();
      p.wing0 += o.strictPass[0];
      p.wing1 += o.strictPass[1];
      p.relevant += o.relevantQubits;
      p.correct += o.relevantCorrect;
      for (const auto& m : o.messages) {
        ++p.audited;
        const bool ok = opt.audit ? opt.audit(m) : causallyPrecedes(m.emission, m.reception);
        p.bad += ok ? 0 : 1;
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(trials)));
  std::vector<Partial> parts(jobs);
  if (jobs == 1) {
    work(0, trials, parts[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back(work, trials * j / jobs, trials * (j + 1) / jobs, std::ref(parts[j]));
    for (auto& th : pool) th.join();
  }
  Partial sum;
  for (const auto& p : parts) {
    sum.strict += p.strict;
    sum.verifier += p.verifier;
    sum.wing0 += p.wing0;
    sum.wing1 += p.wing1;
    sum.relevant += p.relevant;
    sum.correct += p.correct;
    sum.audited += p.audited;
    sum.bad += p.bad;
  }

  AttackReport r;
  r.strategy = strategy.name();
  if (strategy.kind() == StrategyKind::ProjectiveAngle) r.theta = strategy.wing(0).theta;
  r.N = cfg.N;
  r.trials = trials;
  const double n = static_cast<double>(trials);
  r.successes = sum.strict;
  r.successRate = static_cast<double>(sum.strict) / n;
  r.wilson = wilsonInterval(sum.strict, trials);
  r.wing0Passes = sum.wing0;
  r.wing1Passes = sum.wing1;
  r.p0Hat = static_cast<double>(sum.wing0) / n;
  r.p1Hat = static_cast<double>(sum.wing1) / n;
  r.deltaHat = r.p0Hat + r.p1Hat - 1.0;
  r.verifierSuccesses = sum.verifier;
  r.verifierRate = static_cast<double>(sum.verifier) / n;
  r.verifierWilson = wilsonInterval(sum.verifier, trials);
  r.relevantQubits = sum.relevant;
  r.relevantCorrect = sum.correct;
  r.perQubitRate = sum.relevant ? static_cast<double>(sum.correct) / static_cast<double>(sum.relevant) : 0.0;
  r.auditedMessages = sum.audited;
  r.auditViolations = sum.bad;
  return r;
}

struct PerQubitEstimate {
  double rate = 0.0;
  std::size_t relevantQubits = 0;
  std::size_t relevantCorrect = 0;
  std::size_t auditedMessages = 0;
  std::size_t auditViolations = 0;
};

// Qubit-level Monte Carlo: one run over `qubits` transmitted states, scored
// per qubit on the wing that checks its basis.
inline PerQubitEstimate estimatePerQubit(const AttackStrategy& strategy, const ProtocolConfig& cfg,
                                         const Geometry& g, std::size_t qubits, std::uint64_t seed,
                                         const MessageAudit& audit = {}) {
  ProtocolConfig big = cfg;
  big.N = qubits;
  const AttackOutcome o = executeAttack(strategy, big, g, seed);
  PerQubitEstimate est;
  est.relevantQubits = o.relevantQubits;
  est.relevantCorrect = o.relevantCorrect;
  if (o.relevantQubits) est.rate = static_cast<double>(o.relevantCorrect) / static_cast<double>(o.relevantQubits);
  for (const auto& m : o.messages) {
    ++est.auditedMessages;
    const bool ok = audit ? audit(m) : causallyPrecedes(m.emission, m.reception);
    est.auditViolations += ok ? 0 : 1;
  }
  return est;
}

struct SweepRow {
  double theta = 0.0;
  double analyticPerQubit = 0.0;
  double monteCarloPerQubit = 0.0;
  double analyticDual = 0.0;
  double dualRate = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double analyticMaximizer = 0.0;
  double analyticMaximum = 0.0;
  double monteCarloMaximizer = 0.0;  // raw argmax over the grid
  double monteCarloMaximum = 0.0;
  // Argmax of a + b cos(theta) + c sin(theta) fitted to the Monte Carlo
  // points by least squares; resolves the flat top far better than the raw
  // argmax. NaN with fewer than three grid points.
  double fittedMaximizer = 0.0;
  std::size_t auditedMessages = 0;
  std::size_t auditViolations = 0;
};

namespace adversary_detail {

inline double fittedSinusoidPeak(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3) return std::nan("");
  // Normal equations for the basis (1, cos, sin).
  double m[3][4] = {};
  for (const auto& r : rows) {
    const double rad = r.theta * std::numbers::pi / 180.0;
    const double f[3] = {1.0, std::cos(rad), std::sin(rad)};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += f[i] * f[j];
      m[i][3] += f[i] * r.monteCarloPerQubit;
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    if (std::abs(m[col][col]) < 1e-300) return std::nan("");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double k = m[r][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[r][j] -= k * m[col][j];
    }
  }
  const double b = m[1][3] / m[1][1];
  const double c = m[2][3] / m[2][2];
  return std::atan2(c, b) * 180.0 / std::numbers::pi;
}

}  // namespace adversary_detail

inline SweepResult sweepProjectiveAngle(double stepDeg, const ProtocolConfig& cfg, const Geometry& g,
                                        std::size_t trialsPerPoint, std::size_t qubitsPerPoint, std::uint64_t seed,
                                        const EstimateOptions& opt = {}) {
  const double steps = 90.0 / stepDeg;
  if (!(stepDeg > 0.0) || std::abs(steps - std::round(steps)) > 1e-9)
    throw ConfigError("step", "must divide 90 degrees");
  if (qubitsPerPoint < 1) throw ConfigError("qubits", "must be at least 1");
  const auto count = static_cast<std::size_t>(std::round(steps));
  SweepResult res;
  res.analyticMaximum = -1.0;
  res.monteCarloMaximum = -1.0;
  for (std::size_t i = 0; i <= count; ++i) {
    const double theta = std::min(90.0, static_cast<double>(i) * stepDeg);
    const auto s = AttackStrategy::projectiveAngle(theta);
    SweepRow row;
    row.theta = theta;
    row.analyticPerQubit = analyticPerQubitRate(s, cfg.e);
    row.analyticDual = analyticStrictSuccess(s, cfg.N, cfg.eta, cfg.e);
    const PerQubitEstimate pq = estimatePerQubit(s, cfg, g, qubitsPerPoint, deriveSeed(seed, 2 * i), opt.audit);
    row.monteCarloPerQubit = pq.rate;
    res.auditedMessages += pq.auditedMessages;
    res.auditViolations += pq.auditViolations;
    if (trialsPerPoint > 0) {
      const AttackReport r = estimateSuccess(s, cfg, g, trialsPerPoint, deriveSeed(seed, 2 * i + 1), opt);
      row.dualRate = r.successRate;
      res.auditedMessages += r.auditedMessages;
      res.auditViolations += r.auditViolations;
    }
    if (row.analyticPerQubit > res.analyticMaximum + 1e-15) {
      res.analyticMaximum = row.analyticPerQubit;
      res.analyticMaximizer = theta;
    }
    if (row.monteCarloPerQubit > res.monteCarloMaximum) {
      res.monteCarloMaximum = row.monteCarloPerQubit;
      res.monteCarloMaximizer = theta;
    }
    res.rows.push_back(row);
  }
  res.fittedMaximizer = adversary_detail::fittedSinusoidPeak(res.rows);
  return res;
}

}  // namespace rqbc
