#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rqbc/channels.hpp"
#include "rqbc/errors.hpp"
#include "rqbc/spacetime.hpp"

namespace rqbc {

// Raised when a message would arrive outside the future light cone of its
// emission. For honest agents this is a bug; for an adversary it voids the
// strategy.
class CausalityViolation : public Error {
 public:
  CausalityViolation(const Event& emission, const Event& reception)
      : Error(describe(emission, reception)), emission_(emission), reception_(reception) {}

  const Event& emission() const noexcept { return emission_; }
  const Event& reception() const noexcept { return reception_; }

 private:
  static std::string describe(const Event& e, const Event& r) {
    std::ostringstream os;
    os.precision(17);
    os << "causality violation: reception " << r << " is outside the future cone of emission " << e
       << " (interval^2 = " << intervalSquared(e, r) << ")";
    return os.str();
  }

  Event emission_;
  Event reception_;
};

enum class AgentRole : std::uint8_t { AliceP, BobP, AliceQ0, AliceQ1, BobQ0, BobQ1 };

constexpr std::string_view roleName(AgentRole r) noexcept {
  switch (r) {
    case AgentRole::AliceP: return "aliceP";
    case AgentRole::BobP: return "bobP";
    case AgentRole::AliceQ0: return "aliceQ0";
    case AgentRole::AliceQ1: return "aliceQ1";
    case AgentRole::BobQ0: return "bobQ0";
    case AgentRole::BobQ1: return "bobQ1";
  }
  return "?";
}

// A laboratory on a static worldline. Messages sent to the lab are taken in
// no earlier than `availableFrom`.
struct AgentAnchor {
  AgentId id = 0;
  AgentRole role = AgentRole::AliceP;
  Vec3 position;
  double availableFrom = -std::numeric_limits<double>::infinity();
  double processingDelay = 0.0;
};

struct ScheduledEvent {
  double time = 0.0;
  std::uint64_t sequence = 0;
  AgentId target = 0;
  Message payload;
};

inline void requireCausal(const Message& m) {
  if (!m.emission.finite() || !m.reception.finite() || !causallyPrecedes(m.emission, m.reception))
    throw CausalityViolation(m.emission, m.reception);
}

// Post-hoc audit: indices of messages whose reception is not in the future
// cone of their emission.
inline std::vector<std::size_t> auditMessages(std::span<const Message> log) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < log.size(); ++i)
    if (!causallyPrecedes(log[i].emission, log[i].reception)) bad.push_back(i);
  return bad;
}

class Scheduler {
 public:
  class Context;
  using Handler = std::function<void(const Message&, Context&)>;

  // Handed to an agent for the duration of one delivery.
  class Context {
   public:
    const AgentAnchor& self() const noexcept { return self_; }
    const Event& now() const noexcept { return now_; }

    // Emits from this lab after its processing delay; arrives at light
    // speed at the receiver's lab.
    Message send(AgentId to, MessageKind kind, BitString payload) {
      const AgentAnchor& dst = owner_.anchor(to);
      Message m;
      m.sender = self_.id;
      m.receiver = to;
      m.kind = kind;
      m.payload = std::move(payload);
      m.emission = Event::at(self_.position, now_.t + self_.processingDelay);
      m.reception = lightlikeArrival(m.emission, dst.position, dst.availableFrom);
      schedule(m);
      return m;
    }

    // Arbitrary emission/reception pair. The emission must lie in the causal
    // future of the event being handled.
    void schedule(Message m) {
      if (!causallyPrecedes(now_, m.emission)) throw CausalityViolation(now_, m.emission);
      owner_.scheduleMessage(std::move(m));
    }

   private:
    friend class Scheduler;
    Context(Scheduler& owner, const AgentAnchor& self, const Event& now)
        : owner_(owner), self_(self), now_(now) {}

    Scheduler& owner_;
    const AgentAnchor& self_;
    Event now_;
  };

  void addAgent(AgentAnchor anchor, Handler handler) {
    const AgentId id = anchor.id;
    agents_[id] = Entry{anchor, std::move(handler)};
  }

  const AgentAnchor& anchor(AgentId id) const {
    auto it = agents_.find(id);
    if (it == agents_.end()) throw RunFailure("unknown agent id " + std::to_string(id));
    return it->second.anchor;
  }

  // Accepts the message iff its reception is in the closed future cone of
  // its emission. Sequence numbers break ties between equal reception times.
  void scheduleMessage(Message m) {
    requireCausal(m);
    const double time = m.reception.t;
    const AgentId target = m.receiver;
    queue_.push(ScheduledEvent{time, nextSequence_++, target, std::move(m)});
  }

  bool empty() const noexcept { return queue_.empty(); }

  // Drains the queue. Returns the delivered messages in delivery order.
  std::vector<Message> run() {
    std::vector<Message> log;
    while (!queue_.empty()) {
      ScheduledEvent ev = queue_.top();
      queue_.pop();
      auto it = agents_.find(ev.target);
      if (it == agents_.end() || !it->second.handler) {
        std::ostringstream os;
        os << "no transition for agent " << ev.target << " on " << kindName(ev.payload.kind)
           << " at " << ev.payload.reception;
        throw RunFailure(os.str());
      }
      log.push_back(ev.payload);
      Context ctx(*this, it->second.anchor, ev.payload.reception);
      it->second.handler(log.back(), ctx);
    }
    return log;
  }

 private:
  struct Entry {
    AgentAnchor anchor;
    Handler handler;
  };

  struct Later {
    bool operator()(const ScheduledEvent& a, const ScheduledEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::map<AgentId, Entry> agents_;
  std::priority_queue<ScheduledEvent, std::vector<ScheduledEvent>, Later> queue_;
  std::uint64_t nextSequence_ = 0;
};

}  // namespace rqbc
