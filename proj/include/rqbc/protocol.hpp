#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rqbc/channels.hpp"
#include "rqbc/errors.hpp"
#include "rqbc/qubits.hpp"
#include "rqbc/random.hpp"
#include "rqbc/sched.hpp"
#include "rqbc/spacetime.hpp"

namespace rqbc {

struct ProtocolConfig {
  std::size_t N = 100;
  double x = 1.0;
  double e = 0.0;
  double eta = 1.0;
  double tauAccept = 0.15;
  double rhoReject = 0.3;
  double timingTolerance = 1e-9;
  std::size_t minSameBasisCount = 16;

  void validate() const {
    if (N < 1) throw ConfigError("N", "security parameter must be at least 1");
    if (N > 0xFFFFFFFFull) throw ConfigError("N", "security parameter must fit in 32 bits");
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("x", "must be a positive finite real");
    checkNoiseRate(e);
    checkEfficiency(eta);
    if (!(tauAccept >= 0.0 && tauAccept < 0.5)) throw ConfigError("tauAccept", "must lie in [0, 0.5)");
    if (!(rhoReject > 0.0 && rhoReject < 0.5)) throw ConfigError("rhoReject", "must lie in (0, 0.5)");
    if (!(tauAccept < rhoReject)) throw ConfigError("rhoReject", "must exceed tauAccept");
    if (!(timingTolerance >= 0.0) || !std::isfinite(timingTolerance))
      throw ConfigError("timingTolerance", "must be a non-negative finite real");
    if (minSameBasisCount < 1) throw ConfigError("minSameBasisCount", "must be at least 1");
  }

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

constexpr AgentId agentId(AgentRole r) noexcept { return static_cast<AgentId>(r); }
constexpr AgentRole aliceWingRole(int wing) noexcept { return wing == 0 ? AgentRole::AliceQ0 : AgentRole::AliceQ1; }
constexpr AgentRole bobWingRole(int wing) noexcept { return wing == 0 ? AgentRole::BobQ0 : AgentRole::BobQ1; }

// The six laboratories of a run, placed according to `g`.
inline std::array<AgentAnchor, 6> protocolAnchors(const Geometry& g) {
  constexpr double kAlways = -std::numeric_limits<double>::infinity();
  return {{
      {agentId(AgentRole::AliceP), AgentRole::AliceP, g.p.position(), g.p.t, 0.0},
      {agentId(AgentRole::BobP), AgentRole::BobP, g.bobP.position(), g.bobP.t, 0.0},
      {agentId(AgentRole::AliceQ0), AgentRole::AliceQ0, g.q0.position(), kAlways, 0.0},
      {agentId(AgentRole::AliceQ1), AgentRole::AliceQ1, g.q1.position(), kAlways, 0.0},
      {agentId(AgentRole::BobQ0), AgentRole::BobQ0, g.bobQ0.position(), g.bobQ0.t, 0.0},
      {agentId(AgentRole::BobQ1), AgentRole::BobQ1, g.bobQ1.position(), g.bobQ1.t, 0.0},
  }};
}

// ---------------------------------------------------------------------------
// Pads shared between Alice's agent at P and her wing agents.
// ---------------------------------------------------------------------------

struct PadPair {
  OneTimePad sender;    // held at P
  OneTimePad receiver;  // held at Q_i
};

inline PadPair makePadPair(std::string id, std::size_t length, Rng& rng) {
  OneTimePad pad = OneTimePad::random(std::move(id), length, rng);
  return {pad, pad};
}

// One pair per wing. Length must cover the largest outcome report for N.
inline std::array<PadPair, 2> setupPads(const ProtocolConfig& cfg, std::size_t length, Rng& rng) {
  if (length < maxEncodedLength(cfg.N))
    throw ConfigError("padLength", "pads of " + std::to_string(length) + " bits cannot carry a report for N = " +
                                       std::to_string(cfg.N) + " (need " +
                                       std::to_string(maxEncodedLength(cfg.N)) + ")");
  return {makePadPair("P-Q0", length, rng), makePadPair("P-Q1", length, rng)};
}

// ---------------------------------------------------------------------------
// Bob's preparation
// ---------------------------------------------------------------------------

struct Preparation {
  std::vector<QubitRecord> records;
  Message batch;
};

inline Preparation bobPrepare(const ProtocolConfig& cfg, const Geometry& g, Rng& rng) {
  cfg.validate();
  Preparation prep;
  const auto states = randomBB84(cfg.N, rng);
  prep.records.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) prep.records[i] = QubitRecord{i, states[i], false, std::nullopt};
  prep.batch.sender = agentId(AgentRole::BobP);
  prep.batch.receiver = agentId(AgentRole::AliceP);
  prep.batch.kind = MessageKind::QubitBatch;
  prep.batch.emission = g.bobP;
  prep.batch.reception = g.p;
  return prep;
}

// ---------------------------------------------------------------------------
// Alice's commitment
// ---------------------------------------------------------------------------

struct CommitData {
  BitString detected;
  BitString outcomes;   // one per detected qubit, index order
  BitString plaintext;  // encoded outcome report
  std::array<BitString, 2> ciphertexts;
};

// Detection, honest measurement and encryption. Fills the Alice-side fields
// of `records`. The claimed bit travels inside the encrypted report.
inline CommitData aliceMeasure(const ProtocolConfig& cfg, Bit bit, std::span<QubitRecord> records, Rng& rng,
                               std::array<PadPair, 2>& pads) {
  CommitData out;
  out.detected = sampleDetection(records.size(), cfg.eta, rng);
  const double angle = basisAngle(basisForBit(bit));
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].detected = out.detected[i] != 0;
    records[i].honestOutcome.reset();
    if (!records[i].detected) continue;
    const Bit raw = measureProjective(records[i].prepared, angle, rng);
    const Bit noisy = applyNoise(raw, cfg.e, rng);
    records[i].honestOutcome = noisy;
    out.outcomes.push_back(noisy);
  }
  out.plaintext = encodeOutcomes(bit, out.outcomes, out.detected);
  for (int w = 0; w < 2; ++w) out.ciphertexts[w] = otpEncrypt(pads[w].sender, out.plaintext);
  return out;
}

struct CommitMessages {
  Message detectionReport;
  std::array<Message, 2> relays;
  CommitData data;
};

// Messages Alice emits from P when she commits, with light-speed transport.
inline CommitMessages aliceCommit(const ProtocolConfig& cfg, const Geometry& g, Bit bit,
                                  std::span<QubitRecord> records, Rng& rng, std::array<PadPair, 2>& pads) {
  CommitMessages out;
  out.data = aliceMeasure(cfg, bit, records, rng, pads);
  auto& report = out.detectionReport;
  report.sender = agentId(AgentRole::AliceP);
  report.receiver = agentId(AgentRole::BobP);
  report.kind = MessageKind::DetectionReport;
  report.emission = g.p;
  report.reception = lightlikeArrival(g.p, g.bobP.position(), g.bobP.t);
  report.payload = out.data.detected;
  for (int w = 0; w < 2; ++w) {
    auto& m = out.relays[w];
    m.sender = agentId(AgentRole::AliceP);
    m.receiver = agentId(aliceWingRole(w));
    m.kind = MessageKind::OutcomeRelay;
    m.emission = g.p;
    m.reception = lightlikeArrival(g.p, g.wing(w).position(), g.p.t);
    m.payload = out.data.ciphertexts[w];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unveiling
// ---------------------------------------------------------------------------

struct UnveilResult {
  BitString plaintext;
  bool malformed = false;
};

// Decrypts the relayed report with the wing's pad half. A ciphertext that
// does not frame as an outcome report, or is longer than the pad, is
// flagged malformed; the verifier treats it as cheating.
inline UnveilResult decryptRelay(std::span<const Bit> ciphertext, OneTimePad& pad) {
  UnveilResult r;
  if (ciphertext.size() > pad.remaining()) {
    r.malformed = true;
    return r;
  }
  r.plaintext = otpDecrypt(pad, ciphertext);
  try {
    (void)decodeOutcomes(r.plaintext);
  } catch (const MalformedPayload&) {
    r.malformed = true;
  }
  return r;
}

struct UnveilMessage {
  Message message;
  bool malformed = false;
};

inline UnveilMessage aliceUnveil(int wing, std::span<const Bit> relayed, OneTimePad& pad, const Event& unveilTime,
                                 const Geometry& g) {
  UnveilResult r = decryptRelay(relayed, pad);
  UnveilMessage out;
  out.malformed = r.malformed;
  auto& m = out.message;
  m.sender = agentId(aliceWingRole(wing));
  m.receiver = agentId(bobWingRole(wing));
  m.kind = MessageKind::Unveil;
  m.emission = unveilTime;
  m.reception = lightlikeArrival(unveilTime, g.bobWing(wing).position(), g.bobWing(wing).t);
  m.payload = std::move(r.plaintext);
  return out;
}

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

struct WingUnveiling {
  BitString payload;  // plaintext outcome report as handed to Bob
  Event reception;

  std::optional<OutcomeReport> decode() const {
    try {
      return decodeOutcomes(payload);
    } catch (const MalformedPayload&) {
      return std::nullopt;
    }
  }

  friend bool operator==(const WingUnveiling&, const WingUnveiling&) = default;
};

struct Transcript {
  ProtocolConfig config;
  Geometry geometry;
  std::vector<QubitRecord> qubitRecords;
  std::optional<Bit> committedBit;
  std::optional<BitString> detectionReport;  // as received by Bob near P
  std::array<std::optional<WingUnveiling>, 2> wingUnveilings;
  std::vector<Message> messages;
};

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct BasisTally {
  std::size_t count = 0;
  std::size_t mismatches = 0;

  double fraction() const { return count == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(count); }
};

// Compares declared outcomes with the prepared bits of detected qubits in
// basis `b`. Returns nullopt if the report does not cover the record list.
inline std::optional<BasisTally> tallyBasis(std::span<const QubitRecord> records, const OutcomeReport& report,
                                            Basis b) {
  if (report.detected.size() != records.size() || report.outcomes.size() != countSet(report.detected))
    return std::nullopt;
  BasisTally t;
  std::size_t k = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!report.detected[i]) continue;
    const Bit declared = report.outcomes[k++];
    if (records[i].prepared.basis != b) continue;
    ++t.count;
    if (declared != records[i].prepared.bit) ++t.mismatches;
  }
  return t;
}

// Statistical judgement of one unveiling against its claimed bit.
struct WingJudgement {
  bool covered = false;  // report frames correctly over the record list
  BasisTally same;
  BasisTally conj;
  bool enoughData = false;
  bool statisticalOk = false;
  bool otherRejected = false;

  bool passes() const { return covered && enoughData && statisticalOk && otherRejected; }
};

inline WingJudgement judgeReport(std::span<const QubitRecord> records, const OutcomeReport& report,
                                 const ProtocolConfig& cfg) {
  WingJudgement j;
  const Basis claimed = basisForBit(report.claimedBit);
  auto same = tallyBasis(records, report, claimed);
  auto conj = tallyBasis(records, report, conjugate(claimed));
  if (!same || !conj) return j;
  j.covered = true;
  j.same = *same;
  j.conj = *conj;
  j.enoughData = j.same.count >= cfg.minSameBasisCount && j.conj.count >= cfg.minSameBasisCount;
  j.statisticalOk = j.same.fraction() <= cfg.tauAccept;
  j.otherRejected = j.conj.count > 0 && j.conj.fraction() >= cfg.rhoReject;
  return j;
}

inline bool receptionOnTime(const Event& reception, const Event& anchor, const Event& p, double tolerance) {
  return std::abs(reception.t - anchor.t) <= tolerance &&
         distance(reception.position(), anchor.position()) <= tolerance && causallyPrecedes(p, reception);
}

enum class Verdict : std::uint8_t { Accept, RejectCheat, AbortInsufficientData };

constexpr std::string_view verdictName(Verdict v) noexcept {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::RejectCheat: return "rejectCheat";
    case Verdict::AbortInsufficientData: return "abortInsufficientData";
  }
  return "?";
}

struct VerificationReport {
  bool timingOk = false;
  bool wingsEqual = false;
  bool claimedBitsEqual = false;
  bool statisticalOkForClaim = false;
  bool otherHypothesisRejected = false;
  double mismatchSame = 0.0;
  double mismatchConj = 0.0;
  std::size_t sameBasisCount = 0;
  std::size_t conjBasisCount = 0;
  std::optional<Event> comparisonEvent;
  Verdict verdict = Verdict::AbortInsufficientData;
  std::optional<Bit> acceptedBit;
  std::string reason;

  std::string verdictText() const {
    if (verdict == Verdict::Accept && acceptedBit) return "accept(" + std::to_string(*acceptedBit) + ")";
    return std::string(verdictName(verdict));
  }
};

inline VerificationReport bobVerify(const Transcript& tr, const ProtocolConfig& cfg) {
  VerificationReport rep;
  if (tr.qubitRecords.empty()) {
    rep.reason = "missing state list";
    return rep;
  }
  if (!tr.wingUnveilings[0] || !tr.wingUnveilings[1]) {
    rep.reason = "unveiling missing on at least one wing";
    return rep;
  }
  const auto& u0 = *tr.wingUnveilings[0];
  const auto& u1 = *tr.wingUnveilings[1];
  const auto& g = tr.geometry;

  rep.comparisonEvent = earliestJointFuture(u0.reception, u1.reception, g.comparisonPosition);
  rep.timingOk = receptionOnTime(u0.reception, g.bobQ0, g.p, cfg.timingTolerance) &&
                 receptionOnTime(u1.reception, g.bobQ1, g.p, cfg.timingTolerance);
  rep.wingsEqual = u0.payload == u1.payload;

  const auto r0 = u0.decode();
  const auto r1 = u1.decode();
  if (!r0 || !r1) {
    rep.verdict = Verdict::RejectCheat;
    rep.reason = "malformed unveiling";
    return rep;
  }
  rep.claimedBitsEqual = r0->claimedBit == r1->claimedBit;

  const WingJudgement j = judgeReport(tr.qubitRecords, *r0, cfg);
  const bool bitmapAgrees = !tr.detectionReport || *tr.detectionReport == r0->detected;
  rep.sameBasisCount = j.same.count;
  rep.conjBasisCount = j.conj.count;
  rep.mismatchSame = j.same.fraction();
  rep.mismatchConj = j.conj.fraction();
  rep.statisticalOkForClaim = j.covered && bitmapAgrees && j.statisticalOk;
  rep.otherHypothesisRejected = j.covered && j.otherRejected;

  if (!rep.timingOk || !rep.wingsEqual || !rep.claimedBitsEqual || !j.covered || !bitmapAgrees) {
    rep.verdict = Verdict::RejectCheat;
    rep.reason = !rep.timingOk        ? "unveiling off its designated event"
                 : !rep.wingsEqual    ? "wing payloads differ"
                 : !rep.claimedBitsEqual ? "wings claim different bits"
                                         : "report does not match the transmitted states";
    return rep;
  }
  if (!j.enoughData) {
    rep.verdict = Verdict::AbortInsufficientData;
    rep.reason = "too few detected qubits in one basis";
    return rep;
  }
  if (rep.statisticalOkForClaim && rep.otherHypothesisRejected) {
    rep.verdict = Verdict::Accept;
    rep.acceptedBit = r0->claimedBit;
    return rep;
  }
  rep.verdict = Verdict::RejectCheat;
  rep.reason = !rep.statisticalOkForClaim ? "outcomes inconsistent with the claimed basis"
                                          : "outcomes also consistent with the conjugate basis";
  return rep;
}

// ---------------------------------------------------------------------------
// Full honest run through the scheduler
// ---------------------------------------------------------------------------

struct RunOptions {
  std::size_t padLength = 0;          // 0 selects the minimum for N
  double aliceProcessingDelay = 0.0;  // at P, between receipt and emission
  double wingProcessingDelay = 0.0;   // at Q_i, between relay and unveiling
};

// Stream ids used to split a run seed.
enum : std::uint64_t { kStreamPrepare = 1, kStreamPads = 2, kStreamAlice = 3, kStreamWing0 = 4, kStreamWing1 = 5 };

inline Transcript runHonest(const ProtocolConfig& cfg, const Geometry& g, Bit bit, std::uint64_t seed,
                            const RunOptions& opt = {}) {
  cfg.validate();
  if (opt.aliceProcessingDelay < 0.0 || opt.wingProcessingDelay < 0.0)
    throw ConfigError("processingDelay", "must be non-negative");

  Transcript tr;
  tr.config = cfg;
  tr.geometry = g;

  Rng prepRng = makeRng(seed, kStreamPrepare);
  Rng padRng = makeRng(seed, kStreamPads);
  Rng aliceRng = makeRng(seed, kStreamAlice);

  Preparation prep = bobPrepare(cfg, g, prepRng);
  tr.qubitRecords = std::move(prep.records);
  auto pads = setupPads(cfg, opt.padLength ? opt.padLength : maxEncodedLength(cfg.N), padRng);

  Scheduler sched;
  auto anchors = protocolAnchors(g);
  anchors[0].processingDelay = opt.aliceProcessingDelay;
  anchors[2].processingDelay = opt.wingProcessingDelay;
  anchors[3].processingDelay = opt.wingProcessingDelay;

  sched.addAgent(anchors[0], [&](const Message& m, Scheduler::Context& ctx) {
    if (m.kind != MessageKind::QubitBatch) throw RunFailure("aliceP: unexpected " + std::string(kindName(m.kind)));
    tr.committedBit = bit;
    CommitData data = aliceMeasure(cfg, bit, tr.qubitRecords, aliceRng, pads);
    ctx.send(agentId(AgentRole::BobP), MessageKind::DetectionReport, data.detected);
    for (int w = 0; w < 2; ++w)
      ctx.send(agentId(aliceWingRole(w)), MessageKind::OutcomeRelay, std::move(data.ciphertexts[w]));
  });
  sched.addAgent(anchors[1], [&](const Message& m, Scheduler::Context&) {
    if (m.kind != MessageKind::DetectionReport) throw RunFailure("bobP: unexpected " + std::string(kindName(m.kind)));
    tr.detectionReport = m.payload;
  });
  for (int w = 0; w < 2; ++w) {
    sched.addAgent(anchors[2 + w], [&, w](const Message& m, Scheduler::Context& ctx) {
      if (m.kind != MessageKind::OutcomeRelay) throw RunFailure("aliceQ: unexpected " + std::string(kindName(m.kind)));
      UnveilResult r = decryptRelay(m.payload, pads[w].receiver);
      ctx.send(agentId(bobWingRole(w)), MessageKind::Unveil, std::move(r.plaintext));
    });
    sched.addAgent(anchors[4 + w], [&, w](const Message& m, Scheduler::Context&) {
      if (m.kind != MessageKind::Unveil) throw RunFailure("bobQ: unexpected " + std::string(kindName(m.kind)));
      tr.wingUnveilings[w] = WingUnveiling{m.payload, m.reception};
    });
  }

  sched.scheduleMessage(std::move(prep.batch));
  tr.messages = sched.run();
  return tr;
}

}  // namespace rqbc
