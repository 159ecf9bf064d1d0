#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "rqbc/errors.hpp"
#include "rqbc/qubits.hpp"
#include "rqbc/random.hpp"
#include "rqbc/spacetime.hpp"

namespace rqbc {

// ---------------------------------------------------------------------------
// One-time pads
// ---------------------------------------------------------------------------

// Half of a pre-shared pad. Each endpoint owns one copy and consumes it
// front to back; no bit range is handed out twice.
class OneTimePad {
 public:
  OneTimePad() = default;
  OneTimePad(std::string id, BitString bits) : id_(std::move(id)), bits_(std::move(bits)) {}

  static OneTimePad random(std::string id, std::size_t length, Rng& rng) {
    BitString bits(length);
    for (auto& b : bits) b = randomBit(rng);
    return {std::move(id), std::move(bits)};
  }

  const std::string& id() const noexcept { return id_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t consumed() const noexcept { return consumed_; }
  std::size_t remaining() const noexcept { return bits_.size() - consumed_; }

  // Returns the next n unconsumed bits and advances the offset.
  std::span<const Bit> take(std::size_t n) {
    if (n > remaining())
      throw PadExhausted("pad '" + id_ + "' exhausted: requested " + std::to_string(n) +
                         " bits, " + std::to_string(remaining()) + " left");
    std::span<const Bit> seg(bits_.data() + consumed_, n);
    consumed_ += n;
    return seg;
  }

 private:
  std::string id_;
  BitString bits_;
  std::size_t consumed_ = 0;
};

inline BitString xorWith(std::span<const Bit> data, std::span<const Bit> key) {
  BitString out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = static_cast<Bit>((data[i] ^ key[i]) & 1u);
  return out;
}

inline BitString otpEncrypt(OneTimePad& pad, std::span<const Bit> plaintext) {
  return xorWith(plaintext, pad.take(plaintext.size()));
}

// XOR is its own inverse; the receiver runs the mirrored pad.
inline BitString otpDecrypt(OneTimePad& pad, std::span<const Bit> ciphertext) {
  return xorWith(ciphertext, pad.take(ciphertext.size()));
}

// ---------------------------------------------------------------------------
// Outcome report wire format
//
//   claimed bit (1) | N (32, big-endian) | detection bitmap (N) | outcomes
//
// Outcomes are packed in index order, one per detected qubit.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kReportHeaderBits = 33;

struct OutcomeReport {
  Bit claimedBit = 0;
  BitString detected;
  BitString outcomes;

  friend bool operator==(const OutcomeReport&, const OutcomeReport&) = default;
};

inline std::size_t countSet(std::span<const Bit> flags) {
  std::size_t n = 0;
  for (Bit f : flags) n += f ? 1 : 0;
  return n;
}

// Upper bound on the encoded size for N qubits (every qubit detected).
constexpr std::size_t maxEncodedLength(std::size_t n) { return kReportHeaderBits + 2 * n; }

inline BitString encodeOutcomes(Bit claimedBit, std::span<const Bit> outcomes,
                                std::span<const Bit> detectedFlags) {
  if (outcomes.size() != countSet(detectedFlags))
    throw MalformedPayload("encodeOutcomes: " + std::to_string(outcomes.size()) +
                           " outcomes for " + std::to_string(countSet(detectedFlags)) +
                           " detected qubits");
  if (detectedFlags.size() > 0xFFFFFFFFull) throw MalformedPayload("encodeOutcomes: N exceeds 32 bits");
  const auto n = static_cast<std::uint32_t>(detectedFlags.size());
  BitString out;
  out.reserve(kReportHeaderBits + detectedFlags.size() + outcomes.size());
  out.push_back(claimedBit & 1u);
  for (int shift = 31; shift >= 0; --shift) out.push_back(static_cast<Bit>((n >> shift) & 1u));
  for (Bit f : detectedFlags) out.push_back(f ? 1 : 0);
  for (Bit o : outcomes) out.push_back(o & 1u);
  return out;
}

inline OutcomeReport decodeOutcomes(std::span<const Bit> wire) {
  if (wire.size() < kReportHeaderBits)
    throw MalformedPayload("decodeOutcomes: payload shorter than header");
  OutcomeReport r;
  r.claimedBit = wire[0];
  std::uint64_t n = 0;
  for (std::size_t i = 1; i < kReportHeaderBits; ++i) n = (n << 1) | (wire[i] & 1u);
  if (wire.size() < kReportHeaderBits + n)
    throw MalformedPayload("decodeOutcomes: payload shorter than detection bitmap");
  const auto bitmap = wire.subspan(kReportHeaderBits, n);
  r.detected.assign(bitmap.begin(), bitmap.end());
  const std::size_t k = countSet(r.detected);
  if (wire.size() != kReportHeaderBits + n + k)
    throw MalformedPayload("decodeOutcomes: expected " + std::to_string(k) + " outcomes, found " +
                           std::to_string(wire.size() - kReportHeaderBits - n));
  const auto packed = wire.subspan(kReportHeaderBits + n);
  r.outcomes.assign(packed.begin(), packed.end());
  return r;
}

inline BitString encodeOutcomes(const OutcomeReport& r) {
  return encodeOutcomes(r.claimedBit, r.outcomes, r.detected);
}

// ---------------------------------------------------------------------------
// Messages
// ---------------------------------------------------------------------------

using AgentId = std::uint32_t;

enum class MessageKind : std::uint8_t { QubitBatch, DetectionReport, OutcomeRelay, Unveil };

constexpr std::string_view kindName(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::QubitBatch: return "qubit-batch";
    case MessageKind::DetectionReport: return "detection-report";
    case MessageKind::OutcomeRelay: return "outcome-relay";
    case MessageKind::Unveil: return "unveil";
  }
  return "?";
}

// Causal validity is checked when a message is scheduled, not here.
struct Message {
  AgentId sender = 0;
  AgentId receiver = 0;
  Event emission;
  Event reception;
  BitString payload;
  MessageKind kind = MessageKind::QubitBatch;

  friend bool operator==(const Message&, const Message&) = default;
};

inline std::string toBitText(std::span<const Bit> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

inline BitString fromBitText(std::string_view text) {
  BitString bits(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') throw MalformedPayload("bit string contains '" + std::string(1, text[i]) + "'");
    bits[i] = text[i] == '1' ? 1 : 0;
  }
  return bits;
}

}  // namespace rqbc
