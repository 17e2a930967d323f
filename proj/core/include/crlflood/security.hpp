#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "crlflood/coding.hpp"
#include "crlflood/rng.hpp"

namespace crlflood {

/// Byte sizes of the security primitives. Signatures are RSA-SHA2 sized,
/// hashes SHA1 sized; neither is actually computed in the simulation.
struct OverheadConfig {
  int signature_bytes = 256;
  int hash_bytes = 20;

  void validate(const FileSpec& spec) const;
};

struct HashPacketing {
  int hashes_per_packet = 0;
  int packet_count = 0;
};

/// How many hashes fit in one signed hash-information packet, and how many
/// such packets cover all m*k coded packets:
///   hashes_per_packet = floor((packet_bytes - signature_bytes) / hash_bytes)
///   packet_count      = ceil(m*k / hashes_per_packet)
HashPacketing hash_packet_count(const FileSpec& spec, const OverheadConfig& overhead);

/// Number of packets in the Sign-every-Packet scheme: every packet loses
/// signature_bytes of payload, so the 1 MB file needs
/// ceil(k*packet_bytes / (packet_bytes - signature_bytes)) of them.
int sign_every_packet_count(const FileSpec& spec, const OverheadConfig& overhead);

/// Received hash-information packets. Coded ids are assigned to hash
/// packets in contiguous blocks of hashes_per_packet, so a data id is
/// verifiable as soon as the block covering it has arrived.
class HashLedger {
 public:
  HashLedger() = default;
  HashLedger(const FileSpec& spec, const OverheadConfig& overhead);

  int total_packets() const { return total_; }
  int received_count() const { return received_count_; }
  bool complete() const { return received_count_ == total_; }

  bool has_packet(int hash_id) const { return hash_id >= 0 && hash_id < total_ && got_[hash_id]; }

  /// Returns true if the hash packet was new.
  bool add_packet(int hash_id);

  bool covers(int64_t data_id) const {
    const int64_t block = data_id / hashes_per_packet_;
    return block < total_ && got_[static_cast<size_t>(block)];
  }

  /// Uniform draw among held hash packets; ledger must be non-empty.
  int sample_held(Rng& rng) const;

  const std::vector<int>& held() const { return held_; }

 private:
  int total_ = 0;
  int hashes_per_packet_ = 1;
  int received_count_ = 0;
  std::vector<uint8_t> got_;
  std::vector<int> held_;
};

enum class Verdict : uint8_t { Authentic, Polluted, Unknown };

/// Classifies an arriving data packet against the received hashes.
/// Unknown means the covering hash packet has not arrived yet; such packets
/// are quarantined by the schemes and re-classified when the ledger grows.
Verdict classify(const CodedPacket& packet, const HashLedger& ledger);

/// A polluted data packet with a random coded id, as a malicious relay
/// emits whenever it wins the MAC election. Randomizes over the m*k space
/// for a finite precode; rateless schemes get ids from a reserved range
/// that never collides with honest fresh ids.
CodedPacket adversary_emit(Rng& rng, const FileSpec& spec);

/// Real 20-byte digest over a payload; exercised only by the byte-size
/// micro-benchmark and its unit test, never by the simulation.
std::array<uint8_t, 20> sha1_digest(std::span<const uint8_t> payload);

}  // namespace crlflood
