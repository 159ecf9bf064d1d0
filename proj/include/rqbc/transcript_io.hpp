#pragma once

// Line-oriented transcript log. One record per line, tab-separated fields,
// events as four decimal reals (x y z t) printed with 17 significant digits
// so that a read-back is exact.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rqbc/protocol.hpp"

namespace rqbc {

namespace transcript_detail {

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string event(const Event& e) {
  return real(e.x) + '\t' + real(e.y) + '\t' + real(e.z) + '\t' + real(e.t);
}

inline std::string bits(const BitString& b) { return b.empty() ? "-" : toBitText(b); }

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

class Fields {
 public:
  Fields(std::vector<std::string> f, std::size_t lineNo) : f_(std::move(f)), line_(lineNo) {}

  void expect(std::size_t n) const {
    if (f_.size() != n)
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(f_.size()));
  }
  const std::string& str(std::size_t i) const { return f_.at(i); }
  double real(std::size_t i) const {
    char* end = nullptr;
    const double v = std::strtod(f_[i].c_str(), &end);
    if (f_[i].empty() || *end != '\0') fail("bad real '" + f_[i] + "'");
    return v;
  }
  std::size_t count(std::size_t i) const {
    char* end = nullptr;
    const auto v = std::strtoull(f_[i].c_str(), &end, 10);
    if (f_[i].empty() || *end != '\0') fail("bad integer '" + f_[i] + "'");
    return static_cast<std::size_t>(v);
  }
  Bit bit(std::size_t i) const {
    if (f_[i] != "0" && f_[i] != "1") fail("bad bit '" + f_[i] + "'");
    return f_[i] == "1" ? 1 : 0;
  }
  BitString bits(std::size_t i) const { return f_[i] == "-" ? BitString{} : fromBitText(f_[i]); }
  Event event(std::size_t i) const { return {real(i), real(i + 1), real(i + 2), real(i + 3)}; }

  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedPayload("transcript line " + std::to_string(line_) + ": " + what);
  }

 private:
  std::vector<std::string> f_;
  std::size_t line_;
};

inline MessageKind kindFromName(std::string_view s, const Fields& f) {
  for (auto k : {MessageKind::QubitBatch, MessageKind::DetectionReport, MessageKind::OutcomeRelay, MessageKind::Unveil})
    if (kindName(k) == s) return k;
  f.fail("unknown message kind '" + std::string(s) + "'");
}

}  // namespace transcript_detail

inline void writeTranscript(std::ostream& os, const Transcript& tr) {
  using namespace transcript_detail;
  const auto& c = tr.config;
  const auto& g = tr.geometry;
  os << "rqbc-transcript\t1\n";
  os << "config\t" << c.N << '\t' << real(c.x) << '\t' << real(c.e) << '\t' << real(c.eta) << '\t'
     << real(c.tauAccept) << '\t' << real(c.rhoReject) << '\t' << real(c.timingTolerance) << '\t'
     << c.minSameBasisCount << '\n';
  os << "anchor\tP\t" << event(g.p) << '\n';
  os << "anchor\tQ0\t" << event(g.q0) << '\n';
  os << "anchor\tQ1\t" << event(g.q1) << '\n';
  os << "anchor\tbobP\t" << event(g.bobP) << '\n';
  os << "anchor\tbobQ0\t" << event(g.bobQ0) << '\n';
  os << "anchor\tbobQ1\t" << event(g.bobQ1) << '\n';
  const auto offset = [&](const char* name, const LabOffset& o) {
    os << "offset\t" << name << '\t' << real(o.displacement.x) << '\t' << real(o.displacement.y) << '\t'
       << real(o.displacement.z) << '\t' << real(o.delay) << '\n';
  };
  offset("bobP", g.offsets.bobP);
  offset("bobQ0", g.offsets.bobQ0);
  offset("bobQ1", g.offsets.bobQ1);
  os << "comparison\t" << real(g.comparisonPosition.x) << '\t' << real(g.comparisonPosition.y) << '\t'
     << real(g.comparisonPosition.z) << '\n';
  for (const auto& q : tr.qubitRecords) {
    os << "qubit\t" << q.index << '\t' << basisName(q.prepared.basis) << '\t' << int(q.prepared.bit) << '\t'
       << (q.detected ? 1 : 0) << '\t';
    if (q.honestOutcome) os << int(*q.honestOutcome); else os << '-';
    os << '\n';
  }
  os << "commit\t";
  if (tr.committedBit) os << int(*tr.committedBit); else os << '-';
  os << '\n';
  if (tr.detectionReport) os << "detection\t" << bits(*tr.detectionReport) << '\n';
  for (int w = 0; w < 2; ++w) {
    if (!tr.wingUnveilings[w]) continue;
    const auto& u = *tr.wingUnveilings[w];
    os << "unveil\t" << w << '\t' << event(u.reception) << '\t' << bits(u.payload) << '\n';
  }
  for (const auto& m : tr.messages) {
    os << "message\t" << kindName(m.kind) << '\t' << m.sender << '\t' << m.receiver << '\t' << event(m.emission)
       << '\t' << event(m.reception) << '\t' << bits(m.payload) << '\n';
  }
}

inline std::string transcriptText(const Transcript& tr) {
  std::ostringstream os;
  writeTranscript(os, tr);
  return os.str();
}

inline Transcript readTranscript(std::istream& is) {
  using namespace transcript_detail;
  Transcript tr;
  std::string line;
  std::size_t lineNo = 0;
  bool sawHeader = false;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    Fields f(split(line), lineNo);
    const std::string& tag = f.str(0);
    if (!sawHeader) {
      if (tag != "rqbc-transcript") f.fail("missing header");
      f.expect(2);
      if (f.str(1) != "1") f.fail("unsupported version " + f.str(1));
      sawHeader = true;
      continue;
    }
    if (tag == "config") {
      f.expect(9);
      auto& c = tr.config;
      c.N = f.count(1);
      c.x = f.real(2);
      c.e = f.real(3);
      c.eta = f.real(4);
      c.tauAccept = f.real(5);
      c.rhoReject = f.real(6);
      c.timingTolerance = f.real(7);
      c.minSameBasisCount = f.count(8);
    } else if (tag == "anchor") {
      f.expect(6);
      auto& g = tr.geometry;
      const Event e = f.event(2);
      const auto& name = f.str(1);
      if (name == "P") g.p = e;
      else if (name == "Q0") g.q0 = e;
      else if (name == "Q1") g.q1 = e;
      else if (name == "bobP") g.bobP = e;
      else if (name == "bobQ0") g.bobQ0 = e;
      else if (name == "bobQ1") g.bobQ1 = e;
      else f.fail("unknown anchor '" + name + "'");
    } else if (tag == "offset") {
      f.expect(6);
      LabOffset o{{f.real(2), f.real(3), f.real(4)}, f.real(5)};
      const auto& name = f.str(1);
      if (name == "bobP") tr.geometry.offsets.bobP = o;
      else if (name == "bobQ0") tr.geometry.offsets.bobQ0 = o;
      else if (name == "bobQ1") tr.geometry.offsets.bobQ1 = o;
      else f.fail("unknown offset '" + name + "'");
    } else if (tag == "comparison") {
      f.expect(4);
      tr.geometry.comparisonPosition = {f.real(1), f.real(2), f.real(3)};
    } else if (tag == "qubit") {
      f.expect(6);
      QubitRecord q;
      q.index = f.count(1);
      if (f.str(2) != "Z" && f.str(2) != "X") f.fail("bad basis '" + f.str(2) + "'");
      q.prepared.basis = f.str(2) == "Z" ? Basis::Z : Basis::X;
      q.prepared.bit = f.bit(3);
      q.detected = f.bit(4) != 0;
      if (f.str(5) != "-") q.honestOutcome = f.bit(5);
      tr.qubitRecords.push_back(q);
    } else if (tag == "commit") {
      f.expect(2);
      if (f.str(1) != "-") tr.committedBit = f.bit(1);
    } else if (tag == "detection") {
      f.expect(2);
      tr.detectionReport = f.bits(1);
    } else if (tag == "unveil") {
      f.expect(7);
      const auto w = f.count(1);
      if (w > 1) f.fail("wing must be 0 or 1");
      tr.wingUnveilings[w] = WingUnveiling{f.bits(6), f.event(2)};
    } else if (tag == "message") {
      f.expect(13);
      Message m;
      m.kind = kindFromName(f.str(1), f);
      m.sender = static_cast<AgentId>(f.count(2));
      m.receiver = static_cast<AgentId>(f.count(3));
      m.emission = f.event(4);
      m.reception = f.event(8);
      m.payload = f.bits(12);
      tr.messages.push_back(std::move(m));
    } else {
      f.fail("unknown record '" + tag + "'");
    }
  }
  if (!sawHeader) throw MalformedPayload("transcript: empty input");
  return tr;
}

}  // namespace rqbc
