#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "crlflood/coding.hpp"
#include "crlflood/mac.hpp"
#include "crlflood/security.hpp"

namespace crlflood {

enum class Scheme : uint8_t {
  PrecodeAndHash,
  WaitToDecode,
  SignEveryPacket,
  GeniePrecode,
  ProportionalForwarding,
};

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct SchemeConfig {
  Scheme scheme = Scheme::PrecodeAndHash;
  int hash_first_slots = -1;  // -1: ceil(total hash packets / packets_per_slot)
  double hash_forward_prob = 0.2;
  double seed_multiplier = 5;
  double seeding_rate_pps = 60;
  int quarantine_capacity = 1024;
  bool verification = true;  // false = unverified-forwarding ablation

  void validate() const;
  bool uses_hashes() const {
    return scheme == Scheme::PrecodeAndHash || scheme == Scheme::ProportionalForwarding;
  }
  bool rateless_data() const {
    return scheme == Scheme::WaitToDecode || scheme == Scheme::SignEveryPacket ||
           scheme == Scheme::GeniePrecode;
  }
};

/// Slots the sources stay active: seed_multiplier * k / seeding_rate_pps
/// seconds. The window is defined by the original file size regardless of
/// the scheme's own packet count.
int64_t seeding_schedule(const FileSpec& spec, const SchemeConfig& cfg, double slot_seconds);

/// Packets a source emits in one elected slot.
int source_packets_per_slot(const SchemeConfig& cfg, double slot_seconds);

/// Distinct ids a node must collect before it can decode under the scheme.
int64_t decode_threshold(const SchemeConfig& cfg, const FileSpec& spec,
                         const OverheadConfig& overhead);

enum class NodeRole : uint8_t { Source, Relay, Malicious };

struct QuarantinedPacket {
  CodedPacket packet;
  int sender;
};

struct NodeState {
  int id = 0;
  NodeRole role = NodeRole::Relay;
  DecodeState decode;
  HashLedger ledger;
  std::deque<QuarantinedPacket> quarantine;
  std::optional<int64_t> decoded_at_slot;
  int64_t useful_tx = 0;
  int64_t wasted_tx = 0;
  int64_t polluted_rx = 0;
  GenieSource fresh{0};

  // Wait-to-Decode staging buffer: id -> ground-truth authenticity. Nothing
  // here is verified until a whole-file decode is attempted.
  std::unordered_map<int64_t, bool> staged;
  int64_t staged_polluted = 0;
  int64_t failed_decodes = 0;

  // Unverified-forwarding ablation: polluted ids sitting in the data buffer.
  std::unordered_set<int64_t> polluted_held;
  std::vector<int64_t> polluted_list;

  bool honest() const { return role != NodeRole::Malicious; }
};

/// Builds a node with the buffers the scheme needs. Sources hold the whole
/// file: complete hash ledger, decoded data state.
NodeState make_node(int id, NodeRole role, const SchemeConfig& cfg, const FileSpec& spec,
                    const OverheadConfig& overhead);

/// Whether the node would contend for the channel this slot. Mirrors
/// select_transmission: a node contends iff it could emit something.
bool has_send_intent(const SchemeConfig& cfg, const NodeState& node, const FileSpec& spec,
                     int64_t slot, int64_t seeding_slots);

/// Scheme-specific choice of the packet an elected honest node broadcasts.
/// May return nothing (nothing eligible, or the proportional-forwarding
/// gate declined the opportunity).
std::optional<CodedPacket> select_transmission(const SchemeConfig& cfg, NodeState& node,
                                               const FileSpec& spec,
                                               const OverheadConfig& overhead, int64_t slot,
                                               Rng& rng);

enum class ReceiveOutcome : uint8_t {
  NewData,         // sender's transmission was useful
  DuplicateData,   // wasted: receiver already had the id
  PollutedDropped, // wasted: verification caught it
  Quarantined,     // accounting deferred until the covering hash arrives
  NewHash,
  DuplicateHash,
  Ignored,         // e.g. data for an already-decoded receiver
};

struct ReceiveResult {
  ReceiveOutcome outcome = ReceiveOutcome::Ignored;
  // (sender, was_useful) pairs settled by quarantine promotion or eviction.
  std::vector<std::pair<int, bool>> resolved;
};

/// Applies one delivered packet to the receiving node. `sender` is recorded
/// for deferred accounting of quarantined packets.
ReceiveResult on_receive(const SchemeConfig& cfg, NodeState& node, const CodedPacket& packet,
                         int sender, const FileSpec& spec, const OverheadConfig& overhead,
                         int64_t slot);

}  // namespace crlflood
