#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "crlflood/rng.hpp"

namespace crlflood {

/// The file being distributed: k source packets, precoded at rate 1/m into
/// m*k coded packets of which any k reconstruct the file (ideal erasure
/// code). m == nullopt models the rateless "genie" code with an unbounded
/// id space.
struct FileSpec {
  int k = 1000;
  int packet_bytes = 1000;
  std::optional<int> m = 3;

  bool rateless() const { return !m.has_value(); }
  void validate() const;
};

enum class PacketKind : uint8_t { DataCoded, HashInfo, RatelessCoded };

/// A symbolic coded packet. Payload bytes are never materialized; identity
/// plus a ground-truth authenticity flag is all the delay metrics need.
/// size_bytes is carried for overhead accounting.
struct CodedPacket {
  PacketKind kind = PacketKind::DataCoded;
  int64_t id = 0;
  bool authentic = true;
  int size_bytes = 0;
};

/// Count of distinct coded packets, m*k. Rejects the rateless code.
int64_t coded_id_space(const FileSpec& spec);

/// A node's verified coded-packet buffer. Only authentic ids may be
/// inserted; the id multiset is a set (duplicates are the sender's waste,
/// not ours). Once decoded the flag never reverts.
class DecodeState {
 public:
  bool contains(int64_t id) const { return set_.count(id) != 0; }

  /// Returns true if the id was new.
  bool insert(int64_t id) {
    if (!set_.insert(id).second) return false;
    list_.push_back(id);
    return true;
  }

  int64_t distinct() const { return static_cast<int64_t>(list_.size()); }
  bool decoded() const { return decoded_; }
  bool empty() const { return list_.empty(); }

  /// Uniform draw from the received set. Throws on an empty buffer.
  int64_t sample(Rng& rng) const {
    if (list_.empty()) throw std::logic_error("sample from empty buffer");
    return list_[rng.bounded(list_.size())];
  }

  const std::vector<int64_t>& ids() const { return list_; }

  friend bool try_decode_threshold(DecodeState& state, int64_t threshold);

 private:
  std::unordered_set<int64_t> set_;
  std::vector<int64_t> list_;
  bool decoded_ = false;
};

/// Marks the state decoded iff it holds at least `threshold` distinct ids.
/// Idempotent; the flag never reverts.
bool try_decode_threshold(DecodeState& state, int64_t threshold);

/// Decode at the file's own threshold of k distinct coded packets.
bool try_decode(DecodeState& state, const FileSpec& spec);

/// Buffer fullness |H|/k, substituted by m after decode (the fluid-limit
/// convention h_i(t) = M for t > T_i). Infinite for a decoded rateless node.
double buffer_fullness(const DecodeState& state, const FileSpec& spec);

/// Uniform coded id from the full m*k space; what a source or a decoded
/// (re-encoding) relay emits under a finite-rate precode.
int64_t sample_full_space(const FileSpec& spec, Rng& rng);

/// Fresh-id generator for rateless sources: every draw is a never-before
/// emitted id, globally unique across emitters.
class GenieSource {
 public:
  explicit GenieSource(uint32_t emitter) : emitter_(emitter) {}
  int64_t next() { return (static_cast<int64_t>(emitter_) << 32) | counter_++; }

 private:
  uint32_t emitter_;
  uint32_t counter_ = 0;
};

}  // namespace crlflood
