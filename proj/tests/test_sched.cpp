#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "rqbc/protocol.hpp"
#include "rqbc/sched.hpp"
#include "rqbc/transcript_io.hpp"

using namespace rqbc;

namespace {

Message msg(Event e, Event r, AgentId to = 1) {
  Message m;
  m.sender = 0;
  m.receiver = to;
  m.emission = e;
  m.reception = r;
  return m;
}

AgentAnchor anchorAt(AgentId id, Vec3 pos, double delay = 0.0) {
  AgentAnchor a;
  a.id = id;
  a.position = pos;
  a.processingDelay = delay;
  return a;
}

}  // namespace

TEST(ScheduleMessage, Examples) {
  Scheduler s;
  EXPECT_NO_THROW(s.scheduleMessage(msg({0, 0, 0, 0}, {1, 0, 0, 1})));
  EXPECT_THROW(s.scheduleMessage(msg({0, 0, 0, 0}, {1, 0, 0, 0.5})), CausalityViolation);
  EXPECT_THROW(s.scheduleMessage(msg({0, 0, 0, 0.2}, {1, 0, 0, 1})), CausalityViolation);
  EXPECT_THROW(s.scheduleMessage(msg({0, 0, 0, 0}, {0, 0, 0, std::nan("")})), CausalityViolation);
}

TEST(ScheduleMessage, AcceptanceMatchesIntervalRule) {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> jitter(-1e-8, 1e-8);
  for (int i = 0; i < 10000; ++i) {
    const Event e{u(g), u(g), u(g), u(g)};
    Event r{u(g), u(g), u(g), u(g)};
    if (i % 4 == 0) {
      // Land near the cone surface to exercise the tolerance band.
      const double d = distance(e.position(), r.position());
      r.t = e.t + d + jitter(g);
    }
    Scheduler s;
    bool accepted = true;
    try {
      s.scheduleMessage(msg(e, r));
    } catch (const CausalityViolation&) {
      accepted = false;
    }
    ASSERT_EQ(accepted, oracle::inFutureCone({e.x, e.y, e.z, e.t}, {r.x, r.y, r.z, r.t})) << i;
  }
}

TEST(Run, EmptyQueueGivesEmptyLog) {
  Scheduler s;
  EXPECT_TRUE(s.empty());
  EXPECT_TRUE(s.run().empty());
}

TEST(Run, DeliversByReceptionTimeThenInsertionOrder) {
  Scheduler s;
  std::vector<int> order;
  s.addAgent(anchorAt(1, {0, 0, 0}), [&](const Message& m, Scheduler::Context&) { order.push_back(m.payload[0]); });
  auto tagged = [](Event e, Event r, Bit tag) {
    Message m = msg(e, r);
    m.payload = {tag};
    return m;
  };
  s.scheduleMessage(tagged({0, 0, 0, 0}, {0, 0, 0, 3}, 0));
  s.scheduleMessage(tagged({0, 0, 0, 0}, {0, 0, 0, 1}, 1));
  s.scheduleMessage(tagged({0, 0, 0, 0}, {0, 0, 0, 3}, 2));
  s.scheduleMessage(tagged({0, 0, 0, 0}, {0, 0, 0, 1}, 3));
  const auto log = s.run();
  EXPECT_EQ(order, (std::vector<int>{1, 3, 0, 2}));
  EXPECT_EQ(log.size(), 4u);
  EXPECT_TRUE(s.empty());
}

TEST(Run, UnknownAgentIsARunFailure) {
  Scheduler s;
  s.scheduleMessage(msg({0, 0, 0, 0}, {0, 0, 0, 1}, 42));
  try {
    s.run();
    FAIL() << "expected RunFailure";
  } catch (const RunFailure& e) {
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
  Scheduler t;
  t.addAgent(anchorAt(1, {0, 0, 0}), nullptr);
  t.scheduleMessage(msg({0, 0, 0, 0}, {0, 0, 0, 1}));
  EXPECT_THROW(t.run(), RunFailure);
}

TEST(Context, SendAppliesProcessingDelayAndLightSpeed) {
  Scheduler s;
  Message seen;
  s.addAgent(anchorAt(1, {0, 0, 0}, 0.25), [](const Message&, Scheduler::Context& ctx) {
    ctx.send(2, MessageKind::OutcomeRelay, {1, 0});
  });
  s.addAgent(anchorAt(2, {3, 4, 0}), [&](const Message& m, Scheduler::Context&) { seen = m; });
  s.scheduleMessage(msg({0, 0, 0, 0}, {0, 0, 0, 1}));
  const auto log = s.run();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_DOUBLE_EQ(seen.emission.t, 1.25);
  EXPECT_DOUBLE_EQ(seen.reception.t, 6.25);
  EXPECT_EQ(seen.reception.x, 3.0);
}

TEST(Context, BackdatedEmissionIsRejected) {
  Scheduler s;
  s.addAgent(anchorAt(1, {0, 0, 0}), [](const Message&, Scheduler::Context& ctx) {
    Message m = msg({0, 0, 0, 0.5}, {5, 0, 0, 10}, 1);
    ctx.schedule(m);
  });
  s.scheduleMessage(msg({0, 0, 0, 0}, {0, 0, 0, 1}));
  EXPECT_THROW(s.run(), CausalityViolation);
}

TEST(Run, HonestRunUnveilsAtWingTime) {
  ProtocolConfig cfg;
  const Transcript tr = runHonest(cfg, standardGeometry(1.0), 0, 9);
  int unveils = 0;
  for (const auto& m : tr.messages) {
    if (m.kind != MessageKind::Unveil) continue;
    ++unveils;
    EXPECT_EQ(m.reception.t, 1.0);
  }
  EXPECT_EQ(unveils, 2);
  EXPECT_TRUE(auditMessages(tr.messages).empty());
}

TEST(Run, IdenticalSeedGivesIdenticalTranscript) {
  ProtocolConfig cfg;
  cfg.e = 0.03;
  cfg.eta = 0.8;
  const Geometry g = standardGeometry(2.0);
  const std::string a = transcriptText(runHonest(cfg, g, 1, 123));
  const std::string b = transcriptText(runHonest(cfg, g, 1, 123));
  const std::string c = transcriptText(runHonest(cfg, g, 1, 124));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Run, CausedMessagesLeaveAfterTheirCause) {
  ProtocolConfig cfg;
  RunOptions opt;
  opt.aliceProcessingDelay = 0.01;
  opt.wingProcessingDelay = 0.002;
  LabOffsets off;
  off.bobQ0 = {{0.01, 0, 0}, 0.02};
  off.bobQ1 = {{-0.01, 0, 0}, 0.02};
  const Transcript tr = runHonest(cfg, offsetGeometry(1.0, off), 0, 5, opt);
  // Every emission by an agent follows the delivery to it that triggered it.
  for (std::size_t j = 0; j < tr.messages.size(); ++j) {
    const auto& m2 = tr.messages[j];
    if (m2.kind == MessageKind::QubitBatch) continue;
    bool caused = false;
    for (std::size_t i = 0; i < j; ++i) {
      const auto& m1 = tr.messages[i];
      if (m1.receiver == m2.sender && m1.reception.t <= m2.emission.t) caused = true;
    }
    EXPECT_TRUE(caused) << "message " << j;
  }
  EXPECT_TRUE(auditMessages(tr.messages).empty());
}

TEST(AuditMessages, FlagsInjectedViolation) {
  std::vector<Message> log{msg({0, 0, 0, 0}, {1, 0, 0, 1}), msg({0, 0, 0, 0}, {2, 0, 0, 1}),
                           msg({0, 0, 0, 0}, {0, 0, 0, 0})};
  EXPECT_EQ(auditMessages(log), (std::vector<std::size_t>{1}));
}
