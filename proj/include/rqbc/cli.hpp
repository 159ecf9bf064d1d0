#pragma once

// Command-line front end. Kept header-only so tests can drive it in-process.
//
// Exit codes: 0 success, 2 configuration error, 3 causality violation in an
// honest run, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rqbc/adversary.hpp"
#include "rqbc/analysis.hpp"
#include "rqbc/csv.hpp"
#include "rqbc/protocol.hpp"
#include "rqbc/spacetime.hpp"
#include "rqbc/transcript_io.hpp"

namespace rqbc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCausality = 3;

// Applies a flat JSON object onto `cfg`. Every key must be a config field.
inline void applyConfigJson(const nlohmann::json& j, ProtocolConfig& cfg) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto number = [&]() {
      if (!value.is_number()) throw ConfigError(key, "must be a number");
      return value.get<double>();
    };
    const auto count = [&]() -> std::size_t {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        throw ConfigError(key, "must be a non-negative integer");
      return value.get<std::size_t>();
    };
    if (key == "N") cfg.N = count();
    else if (key == "x") cfg.x = number();
    else if (key == "e") cfg.e = number();
    else if (key == "eta") cfg.eta = number();
    else if (key == "tauAccept") cfg.tauAccept = number();
    else if (key == "rhoReject") cfg.rhoReject = number();
    else if (key == "timingTolerance") cfg.timingTolerance = number();
    else if (key == "minSameBasisCount") cfg.minSameBasisCount = count();
    else throw ConfigError(key, "unknown configuration key");
  }
}

inline ProtocolConfig loadConfigFile(const std::string& path, ProtocolConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  applyConfigJson(j, cfg);
  return cfg;
}

// Parses "a,b,..." into reals.
inline std::vector<double> parseReals(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, "'" + item + "' is not a number");
    }
  }
  return out;
}

// "dx,delay" or "dx,dy,dz,delay".
inline LabOffset parseOffset(const std::string& text, const std::string& field) {
  const auto v = parseReals(text, field);
  if (v.size() == 2) return {{v[0], 0.0, 0.0}, v[1]};
  if (v.size() == 4) return {{v[0], v[1], v[2]}, v[3]};
  throw ConfigError(field, "expected dx,delay or dx,dy,dz,delay");
}

inline Vec3 parsePoint(const std::string& text, const std::string& field) {
  const auto v = parseReals(text, field);
  if (v.size() == 1) return {v[0], 0.0, 0.0};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw ConfigError(field, "expected x or x,y,z");
}

inline WingRule parseWingRule(const std::string& text, const std::string& field) {
  if (text == "blind") return WingRule::blindGuess();
  if (text == "fixed-z") return WingRule::fixedBasis(Basis::Z);
  if (text == "fixed-x") return WingRule::fixedBasis(Basis::X);
  if (text.rfind("projective:", 0) == 0) {
    const auto v = parseReals(text.substr(11), field);
    if (v.size() == 1) return WingRule::projectiveAngle(v[0]);
  }
  throw ConfigError(field, "expected blind, fixed-z, fixed-x or projective:<theta>");
}

inline std::string fmtEvent(const Event& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "(%.12g, %.12g, %.12g, %.12g)", e.x, e.y, e.z, e.t);
  return buf;
}

inline std::string fmtFixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline void line(std::ostream& os, const std::string& key, const std::string& value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-26s", key.c_str());
  os << buf << " = " << value << '\n';
}

// Parsed command line. Optional fields are overrides applied after the
// config file.
struct RunSpec {
  std::string command;
  std::string configPath;
  std::optional<std::size_t> n;
  std::optional<double> x, e, eta, tauAccept, rhoReject, timingTolerance;
  std::optional<std::size_t> minSameBasisCount;
  std::uint64_t seed = kDefaultSeed;
  bool entropy = false;
  std::string outputPath;
  std::size_t trials = 10000;
  unsigned jobs = 1;

  int bit = 0;
  std::string transcriptPath;
  std::string offsetP, offsetQ0, offsetQ1, comparison, worldline;
  std::string strategy = "projective";
  double theta = 45.0;
  std::string wing0 = "blind", wing1 = "blind";
  double step = 1.0;
  std::size_t qubits = 10000;
  std::string nValues;
  double target = 0.99;

  ProtocolConfig config() const {
    ProtocolConfig c = configPath.empty() ? ProtocolConfig{} : loadConfigFile(configPath);
    if (n) c.N = *n;
    if (x) c.x = *x;
    if (e) c.e = *e;
    if (eta) c.eta = *eta;
    if (tauAccept) c.tauAccept = *tauAccept;
    if (rhoReject) c.rhoReject = *rhoReject;
    if (timingTolerance) c.timingTolerance = *timingTolerance;
    if (minSameBasisCount) c.minSameBasisCount = *minSameBasisCount;
    c.validate();
    return c;
  }

  Geometry geometry(double scale) const {
    LabOffsets o;
    if (!offsetP.empty()) o.bobP = parseOffset(offsetP, "offset-p");
    if (!offsetQ0.empty()) o.bobQ0 = parseOffset(offsetQ0, "offset-q0");
    if (!offsetQ1.empty()) o.bobQ1 = parseOffset(offsetQ1, "offset-q1");
    Geometry g = offsetGeometry(scale, o);
    if (!comparison.empty()) g.comparisonPosition = parsePoint(comparison, "comparison");
    return g;
  }

  std::uint64_t effectiveSeed() const { return entropy ? (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}() : seed; }

  std::vector<std::size_t> nList(std::size_t fallback) const {
    if (nValues.empty()) return {fallback};
    std::vector<std::size_t> out;
    for (double v : parseReals(nValues, "n-values")) {
      if (v < 1 || v != std::floor(v)) throw ConfigError("n-values", "entries must be positive integers");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }
};

inline AttackStrategy makeStrategy(const RunSpec& s) {
  if (s.strategy == "blind") return AttackStrategy::blindGuess();
  if (s.strategy == "fixed-z") return AttackStrategy::fixedBasis(Basis::Z);
  if (s.strategy == "fixed-x") return AttackStrategy::fixedBasis(Basis::X);
  if (s.strategy == "projective") return AttackStrategy::projectiveAngle(s.theta);
  if (s.strategy == "pair")
    return AttackStrategy::perWingPair(parseWingRule(s.wing0, "wing0"), parseWingRule(s.wing1, "wing1"));
  throw ConfigError("strategy", "expected blind, fixed-z, fixed-x, projective or pair");
}

inline int runHonestCommand(const RunSpec& s, std::ostream& out) {
  const ProtocolConfig cfg = s.config();
  const Geometry g = s.geometry(cfg.x);
  if (s.bit != 0 && s.bit != 1) throw ConfigError("bit", "must be 0 or 1");
  const std::uint64_t seed = s.effectiveSeed();
  const Transcript tr = runHonest(cfg, g, static_cast<Bit>(s.bit), seed);
  const VerificationReport rep = bobVerify(tr, cfg);

  line(out, "verdict", rep.verdictText());
  line(out, "committed bit", std::to_string(s.bit));
  line(out, "N", std::to_string(cfg.N));
  line(out, "seed", std::to_string(seed));
  line(out, "timingOk", rep.timingOk ? "true" : "false");
  line(out, "wingsEqual", rep.wingsEqual ? "true" : "false");
  line(out, "claimedBitsEqual", rep.claimedBitsEqual ? "true" : "false");
  line(out, "statisticalOkForClaim", rep.statisticalOkForClaim ? "true" : "false");
  line(out, "otherHypothesisRejected", rep.otherHypothesisRejected ? "true" : "false");
  line(out, "sameBasisCount", std::to_string(rep.sameBasisCount));
  line(out, "conjBasisCount", std::to_string(rep.conjBasisCount));
  line(out, "mismatchSame", fmtFixed(rep.mismatchSame, 3));
  line(out, "mismatchConj", fmtFixed(rep.mismatchConj, 3));
  line(out, "unveil Q0 received", fmtEvent(tr.wingUnveilings[0]->reception));
  line(out, "unveil Q1 received", fmtEvent(tr.wingUnveilings[1]->reception));
  if (rep.comparisonEvent) line(out, "comparison event", fmtEvent(*rep.comparisonEvent));
  if (!rep.reason.empty()) line(out, "reason", rep.reason);

  if (!s.transcriptPath.empty()) {
    std::ofstream f(s.transcriptPath, std::ios::binary);
    if (!f) throw Error("cannot open '" + s.transcriptPath + "' for writing");
    writeTranscript(f, tr);
  }
  if (!s.outputPath.empty()) {
    csv::append(s.outputPath, "seed,N,bit,verdict,mismatchSame,mismatchConj,sameBasisCount,conjBasisCount",
                {std::to_string(seed) + "," + std::to_string(cfg.N) + "," + std::to_string(s.bit) + "," +
                 rep.verdictText() + "," + csv::sig6(rep.mismatchSame) + "," + csv::sig6(rep.mismatchConj) + "," +
                 std::to_string(rep.sameBasisCount) + "," + std::to_string(rep.conjBasisCount)});
  }
  return kExitOk;
}

inline int runAttackCommand(const RunSpec& s, std::ostream& out) {
  const ProtocolConfig cfg = s.config();
  const Geometry g = s.geometry(cfg.x);
  const AttackStrategy strategy = makeStrategy(s);
  const AttackReport r = estimateSuccess(strategy, cfg, g, s.trials, s.effectiveSeed(), {s.jobs, {}});

  line(out, "strategy", r.strategy);
  if (r.theta) line(out, "theta", csv::sig6(*r.theta));
  line(out, "N", std::to_string(r.N));
  line(out, "trials", std::to_string(r.trials));
  line(out, "successes (strict)", std::to_string(r.successes));
  line(out, "rate (strict)", csv::sig6(r.successRate));
  line(out, "wilson95 (strict)", "[" + csv::sig6(r.wilson.lo) + ", " + csv::sig6(r.wilson.hi) + "]");
  line(out, "analytic strict rate", csv::sig6(analyticStrictSuccess(strategy, cfg.N, cfg.eta, cfg.e)));
  line(out, "p0Hat", csv::sig6(r.p0Hat));
  line(out, "p1Hat", csv::sig6(r.p1Hat));
  line(out, "deltaHat", csv::sig6(r.deltaHat));
  line(out, "rate (verifier)", csv::sig6(r.verifierRate));
  line(out, "wilson95 (verifier)", "[" + csv::sig6(r.verifierWilson.lo) + ", " + csv::sig6(r.verifierWilson.hi) + "]");
  line(out, "per-qubit rate", csv::sig6(r.perQubitRate));
  line(out, "analytic per-qubit rate", csv::sig6(analyticPerQubitRate(strategy, cfg.e)));
  line(out, "causality audit", std::to_string(r.auditViolations) + " violations in " +
                                   std::to_string(r.auditedMessages) + " messages");
  if (!s.outputPath.empty()) csv::append(s.outputPath, csv::attackHeader(), {csv::attackRow(r)});
  return kExitOk;
}

inline int runSweepCommand(const RunSpec& s, std::ostream& out) {
  const ProtocolConfig base = s.config();
  const Geometry g = s.geometry(base.x);
  const std::uint64_t seed = s.effectiveSeed();
  std::vector<std::string> rows;
  out << csv::sweepHeader() << '\n';
  for (std::size_t n : s.nList(base.N)) {
    ProtocolConfig cfg = base;
    cfg.N = n;
    cfg.validate();
    const SweepResult res = sweepProjectiveAngle(s.step, cfg, g, s.trials, s.qubits, deriveSeed(seed, n), {s.jobs, {}});
    for (const auto& r : res.rows) {
      rows.push_back(csv::sweepRow(n, r));
      out << rows.back() << '\n';
    }
    out << "# N=" << n << " analytic maximizer " << csv::sig6(res.analyticMaximizer) << " deg, per-qubit "
        << csv::sig6(res.analyticMaximum) << "; Monte Carlo maximizer " << csv::sig6(res.monteCarloMaximizer)
        << " deg, per-qubit " << csv::sig6(res.monteCarloMaximum) << "; fitted maximizer "
        << csv::sig6(res.fittedMaximizer) << " deg\n";
  }
  if (!s.outputPath.empty()) csv::append(s.outputPath, csv::sweepHeader(), rows);
  return kExitOk;
}

inline int runGeometryCommand(const RunSpec& s, std::ostream& out) {
  const double scale = s.x.value_or(1.0);
  const Geometry g = s.geometry(scale);
  const Vec3 w = s.worldline.empty() ? Vec3{} : parsePoint(s.worldline, "worldline");
  line(out, "P", fmtEvent(g.p));
  line(out, "Q0", fmtEvent(g.q0));
  line(out, "Q1", fmtEvent(g.q1));
  line(out, "P'", fmtEvent(g.bobP));
  line(out, "Q'0", fmtEvent(g.bobQ0));
  line(out, "Q'1", fmtEvent(g.bobQ1));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", intervalSquared(g.p, g.q0));
  line(out, "interval^2(P, Q0)", buf);
  std::snprintf(buf, sizeof buf, "%.12g", intervalSquared(g.q0, g.q1));
  line(out, "interval^2(Q0, Q1)", buf);
  line(out, "Q0 precedes Q'0", causallyPrecedes(g.q0, g.bobQ0) ? "true" : "false");
  line(out, "Q1 precedes Q'1", causallyPrecedes(g.q1, g.bobQ1) ? "true" : "false");
  line(out, "P' precedes P", causallyPrecedes(g.bobP, g.p) ? "true" : "false");
  std::snprintf(buf, sizeof buf, "%.12g", latestBindingTime(g.bobQ0, g.bobQ1, w));
  char at[96];
  std::snprintf(at, sizeof at, " at (%.12g, %.12g, %.12g)", w.x, w.y, w.z);
  line(out, "latestBindingTime", std::string(buf) + at);
  line(out, "comparison event", fmtEvent(earliestJointFuture(g.bobQ0, g.bobQ1, g.comparisonPosition)));
  return kExitOk;
}

inline int runPlanCommand(const RunSpec& s, std::ostream& out) {
  const ProtocolConfig cfg = s.config();
  const ThresholdPlan p = planThresholds(cfg.N, cfg.e, cfg.eta, s.target, cfg.minSameBasisCount);
  line(out, "N", std::to_string(p.N));
  line(out, "target completeness", csv::sig6(s.target));
  line(out, "tauAccept", fmtFixed(p.tauAccept, 2));
  line(out, "rhoReject", fmtFixed(p.rhoReject, 3));
  line(out, "completenessFailureProb", csv::sig6(p.completenessFailureProb));
  line(out, "  abort", csv::sig6(p.breakdown.abortProb));
  line(out, "  claimed-basis failure", csv::sig6(p.breakdown.sameFailProb));
  line(out, "  conjugate failure", csv::sig6(p.breakdown.conjFailProb));
  line(out, "strictSoundnessBound", csv::sig6(p.strictSoundnessBound));
  line(out, "thresholdAttackRate", csv::sig6(p.thresholdAttackRate));
  const auto curve = soundnessCurve(s.nList(cfg.N), kIntermediateRate);
  out << csv::soundnessHeader() << '\n';
  for (const auto& r : curve) out << csv::soundnessRow(r, kIntermediateRate) << '\n';
  if (!s.outputPath.empty()) csv::append(s.outputPath, csv::planHeader(), {csv::planRow(p)});
  return kExitOk;
}

inline void addConfigFlags(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--config", s.configPath, "JSON config file with ProtocolConfig keys");
  cmd->add_option("--n", s.n, "security parameter N (number of qubits)");
  cmd->add_option("--x", s.x, "geometry scale: Q0 = (x,0,0,x), Q1 = (-x,0,0,x)");
  cmd->add_option("--e", s.e, "noise rate in [0, 0.5)");
  cmd->add_option("--eta", s.eta, "detection efficiency in (0, 1]");
  cmd->add_option("--tau-accept", s.tauAccept, "max mismatch fraction on the claimed basis");
  cmd->add_option("--rho-reject", s.rhoReject, "min mismatch fraction on the conjugate basis");
  cmd->add_option("--timing-tolerance", s.timingTolerance, "allowed unveiling offset from Q'_i");
  cmd->add_option("--min-same-basis-count", s.minSameBasisCount, "minimum qubits per basis before judging");
}

inline void addRunFlags(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--seed", s.seed, "64-bit seed (default 0xB1C0FFEE)");
  cmd->add_flag("--entropy", s.entropy, "seed from the operating system instead");
  cmd->add_option("--out", s.outputPath, "append CSV rows to this file");
  cmd->add_option("--offset-p", s.offsetP, "Bob's preparation lab: dx,delay or dx,dy,dz,delay");
  cmd->add_option("--offset-q0", s.offsetQ0, "Bob's lab near Q0: dx,delay or dx,dy,dz,delay");
  cmd->add_option("--offset-q1", s.offsetQ1, "Bob's lab near Q1: dx,delay or dx,dy,dz,delay");
  cmd->add_option("--comparison", s.comparison, "Bob's comparison worldline: x or x,y,z");
}

inline int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relativistic quantum bit commitment simulator"};
  app.require_subcommand(1);
  RunSpec s;

  auto* honest = app.add_subcommand("honest", "run one honest commitment and verify it");
  addConfigFlags(honest, s);
  addRunFlags(honest, s);
  honest->add_option("--bit", s.bit, "committed bit")->check(CLI::Range(0, 1));
  honest->add_option("--transcript", s.transcriptPath, "write the transcript log here");

  auto* attack = app.add_subcommand("attack", "estimate a cheating strategy's dual-unveiling rate");
  addConfigFlags(attack, s);
  addRunFlags(attack, s);
  attack->add_option("--strategy", s.strategy, "blind | fixed-z | fixed-x | projective | pair");
  attack->add_option("--theta", s.theta, "measurement angle in degrees for projective");
  attack->add_option("--wing0", s.wing0, "wing-0 rule for pair: blind | fixed-z | fixed-x | projective:<theta>");
  attack->add_option("--wing1", s.wing1, "wing-1 rule for pair");
  attack->add_option("--trials", s.trials, "independent runs");
  attack->add_option("--jobs", s.jobs, "worker threads");

  auto* sweep = app.add_subcommand("sweep", "sweep the projective measurement angle");
  addConfigFlags(sweep, s);
  addRunFlags(sweep, s);
  sweep->add_option("--step", s.step, "angle step in degrees; must divide 90");
  sweep->add_option("--trials", s.trials, "dual-unveiling runs per angle");
  sweep->add_option("--qubits", s.qubits, "qubits per angle for the per-qubit estimate");
  sweep->add_option("--n-values", s.nValues, "comma-separated list of N");
  sweep->add_option("--jobs", s.jobs, "worker threads");

  auto* geometry = app.add_subcommand("geometry", "print the spacetime layout");
  geometry->add_option("--x", s.x, "geometry scale");
  geometry->add_option("--offset-p", s.offsetP, "Bob's preparation lab: dx,delay or dx,dy,dz,delay");
  geometry->add_option("--offset-q0", s.offsetQ0, "Bob's lab near Q0: dx,delay or dx,dy,dz,delay");
  geometry->add_option("--offset-q1", s.offsetQ1, "Bob's lab near Q1: dx,delay or dx,dy,dz,delay");
  geometry->add_option("--comparison", s.comparison, "Bob's comparison worldline: x or x,y,z");
  geometry->add_option("--worldline", s.worldline, "worldline for latestBindingTime: x or x,y,z");

  auto* plan = app.add_subcommand("plan", "choose thresholds for a completeness target");
  addConfigFlags(plan, s);
  plan->add_option("--target", s.target, "target completeness in (0, 1)");
  plan->add_option("--n-values", s.nValues, "N values for the soundness table");
  plan->add_option("--out", s.outputPath, "append the plan as a CSV row");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (honest->parsed()) return runHonestCommand(s, out);
    if (attack->parsed()) return runAttackCommand(s, out);
    if (sweep->parsed()) return runSweepCommand(s, out);
    if (geometry->parsed()) return runGeometryCommand(s, out);
    if (plan->parsed()) return runPlanCommand(s, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CausalityViolation& e) {
    err << "error: " << e.what() << '\n';
    return honest->parsed() ? kExitCausality : kExitFailure;
  } catch (const InfeasibleTarget& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace rqbc::cli
