#include "crlflood/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crlflood {

namespace {

bool has_file(const NodeState& node) { return node.role == NodeRole::Source || node.decode.decoded(); }

bool hash_phase(const SchemeConfig& cfg, int64_t slot) {
  return cfg.uses_hashes() && cfg.verification && slot < cfg.hash_first_slots;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::PrecodeAndHash: return "precode_and_hash";
    case Scheme::WaitToDecode: return "wait_to_decode";
    case Scheme::SignEveryPacket: return "sign_every_packet";
    case Scheme::GeniePrecode: return "genie_precode";
    case Scheme::ProportionalForwarding: return "proportional_forwarding";
  }
  return "?";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::PrecodeAndHash, Scheme::WaitToDecode, Scheme::SignEveryPacket,
                   Scheme::GeniePrecode, Scheme::ProportionalForwarding}) {
    if (name == scheme_name(s)) return s;
  }
  return std::nullopt;
}

void SchemeConfig::validate() const {
  if (hash_forward_prob < 0 || hash_forward_prob > 1)
    throw std::invalid_argument("hash_forward_prob must be in [0,1]");
  if (seed_multiplier <= 0) throw std::invalid_argument("seed_multiplier must be positive");
  if (seeding_rate_pps <= 0) throw std::invalid_argument("seeding_rate_pps must be positive");
  if (quarantine_capacity < 1) throw std::invalid_argument("quarantine_capacity must be >= 1");
}

int64_t seeding_schedule(const FileSpec& spec, const SchemeConfig& cfg, double slot_seconds) {
  const double seconds = cfg.seed_multiplier * spec.k / cfg.seeding_rate_pps;
  return static_cast<int64_t>(std::ceil(seconds / slot_seconds - 1e-9));
}

int source_packets_per_slot(const SchemeConfig& cfg, double slot_seconds) {
  return std::max(1, static_cast<int>(std::llround(cfg.seeding_rate_pps * slot_seconds)));
}

int64_t decode_threshold(const SchemeConfig& cfg, const FileSpec& spec,
                         const OverheadConfig& overhead) {
  if (cfg.scheme == Scheme::SignEveryPacket) return sign_every_packet_count(spec, overhead);
  return spec.k;
}

NodeState make_node(int id, NodeRole role, const SchemeConfig& cfg, const FileSpec& spec,
                    const OverheadConfig& overhead) {
  NodeState node;
  node.id = id;
  node.role = role;
  node.fresh = GenieSource(static_cast<uint32_t>(id) + 1);
  if (cfg.uses_hashes() && cfg.verification) {
    node.ledger = HashLedger(spec, overhead);
    if (role == NodeRole::Source) {
      for (int h = 0; h < node.ledger.total_packets(); ++h) node.ledger.add_packet(h);
    }
  }
  return node;
}

bool has_send_intent(const SchemeConfig& cfg, const NodeState& node, const FileSpec& spec,
                     int64_t slot, int64_t seeding_slots) {
  if (node.role == NodeRole::Malicious) return true;
  if (node.role == NodeRole::Source) return slot < seeding_slots;
  switch (cfg.scheme) {
    case Scheme::WaitToDecode:
      return node.decode.decoded();
    case Scheme::SignEveryPacket:
      return !node.decode.empty();
    case Scheme::GeniePrecode:
      return node.decode.decoded() || !node.decode.empty();
    case Scheme::PrecodeAndHash:
    case Scheme::ProportionalForwarding: {
      if (!cfg.verification)
        return node.decode.decoded() || !node.decode.empty() || !node.polluted_list.empty();
      bool any;
      if (hash_phase(cfg, slot)) {
        any = node.ledger.received_count() > 0;
      } else {
        any = node.ledger.received_count() > 0 || !node.decode.empty() || node.decode.decoded();
      }
      if (cfg.scheme == Scheme::ProportionalForwarding && !node.decode.decoded() &&
          node.decode.distinct() == 0)
        return false;  // forwarding probability would be zero
      return any;
    }
  }
  return false;
}

namespace {

std::optional<CodedPacket> hash_packet(const NodeState& node, const FileSpec& spec, Rng& rng) {
  if (node.ledger.received_count() == 0) return std::nullopt;
  return CodedPacket{PacketKind::HashInfo, node.ledger.sample_held(rng), true,
                     spec.packet_bytes};
}

std::optional<CodedPacket> precode_data_packet(const NodeState& node, const FileSpec& spec,
                                               Rng& rng) {
  if (has_file(node))
    return CodedPacket{PacketKind::DataCoded, sample_full_space(spec, rng), true,
                       spec.packet_bytes};
  if (node.decode.empty()) return std::nullopt;
  return CodedPacket{PacketKind::DataCoded, node.decode.sample(rng), true, spec.packet_bytes};
}

}  // namespace

std::optional<CodedPacket> select_transmission(const SchemeConfig& cfg, NodeState& node,
                                               const FileSpec& spec,
                                               const OverheadConfig& overhead, int64_t slot,
                                               Rng& rng) {
  (void)overhead;
  if (node.role == NodeRole::Malicious)
    throw std::logic_error("malicious transmissions come from adversary_emit");

  switch (cfg.scheme) {
    case Scheme::WaitToDecode:
      if (!has_file(node)) return std::nullopt;
      return CodedPacket{PacketKind::RatelessCoded, node.fresh.next(), true, spec.packet_bytes};

    case Scheme::SignEveryPacket:
      if (node.role == NodeRole::Source)
        return CodedPacket{PacketKind::RatelessCoded, node.fresh.next(), true, spec.packet_bytes};
      if (node.decode.empty()) return std::nullopt;
      return CodedPacket{PacketKind::RatelessCoded, node.decode.sample(rng), true,
                         spec.packet_bytes};

    case Scheme::GeniePrecode:
      if (has_file(node))
        return CodedPacket{PacketKind::RatelessCoded, node.fresh.next(), true, spec.packet_bytes};
      if (node.decode.empty()) return std::nullopt;
      return CodedPacket{PacketKind::RatelessCoded, node.decode.sample(rng), true,
                         spec.packet_bytes};

    case Scheme::PrecodeAndHash:
    case Scheme::ProportionalForwarding: {
      if (cfg.scheme == Scheme::ProportionalForwarding && !has_file(node)) {
        const double p =
            std::min(1.0, static_cast<double>(node.decode.distinct()) / spec.k);
        if (!rng.bernoulli(p)) return std::nullopt;
      }
      if (!cfg.verification) {
        // Ablation: forward anything held, polluted included.
        if (has_file(node)) return precode_data_packet(node, spec, rng);
        const size_t total = node.decode.ids().size() + node.polluted_list.size();
        if (total == 0) return std::nullopt;
        const size_t pick = rng.bounded(total);
        if (pick < node.decode.ids().size())
          return CodedPacket{PacketKind::DataCoded, node.decode.ids()[pick], true,
                             spec.packet_bytes};
        return CodedPacket{PacketKind::DataCoded,
                           node.polluted_list[pick - node.decode.ids().size()], false,
                           spec.packet_bytes};
      }
      if (hash_phase(cfg, slot)) return hash_packet(node, spec, rng);
      if (rng.bernoulli(cfg.hash_forward_prob)) {
        if (auto h = hash_packet(node, spec, rng)) return h;
        return precode_data_packet(node, spec, rng);
      }
      if (auto d = precode_data_packet(node, spec, rng)) return d;
      return hash_packet(node, spec, rng);
    }
  }
  return std::nullopt;
}

namespace {

void promote_quarantine(const SchemeConfig& cfg, NodeState& node, const FileSpec& spec,
                        const OverheadConfig& overhead, int64_t slot, ReceiveResult& result) {
  std::deque<QuarantinedPacket> keep;
  const int64_t threshold = decode_threshold(cfg, spec, overhead);
  for (QuarantinedPacket& q : node.quarantine) {
    if (!node.ledger.covers(q.packet.id)) {
      keep.push_back(std::move(q));
      continue;
    }
    if (q.packet.authentic) {
      const bool fresh = node.decode.insert(q.packet.id);
      result.resolved.emplace_back(q.sender, fresh);
    } else {
      ++node.polluted_rx;
      result.resolved.emplace_back(q.sender, false);
    }
  }
  node.quarantine.swap(keep);
  if (!node.decode.decoded() && try_decode_threshold(node.decode, threshold))
    node.decoded_at_slot = slot;
}

ReceiveResult receive_wait_to_decode(const SchemeConfig& cfg, NodeState& node,
                                     const CodedPacket& packet, const FileSpec& spec,
                                     const OverheadConfig& overhead, int64_t slot) {
  ReceiveResult r;
  if (node.decode.decoded()) {
    r.outcome = ReceiveOutcome::Ignored;
    return r;
  }
  auto [it, fresh] = node.staged.try_emplace(packet.id, packet.authentic);
  if (!fresh) {
    r.outcome = ReceiveOutcome::DuplicateData;
    return r;
  }
  r.outcome = ReceiveOutcome::NewData;
  if (!packet.authentic) ++node.staged_polluted;
  const int64_t threshold = decode_threshold(cfg, spec, overhead);
  if (static_cast<int64_t>(node.staged.size()) >= threshold) {
    if (node.staged_polluted == 0) {
      // Whole-file signature verifies: the staged set becomes the file.
      for (const auto& [id, authentic] : node.staged) node.decode.insert(id);
      try_decode_threshold(node.decode, threshold);
      node.decoded_at_slot = slot;
      node.staged.clear();
    } else {
      // Signature check fails and nothing in the stage is individually
      // verifiable, so all of it is discarded.
      node.staged.clear();
      node.staged_polluted = 0;
      ++node.failed_decodes;
    }
  }
  return r;
}

ReceiveResult receive_verified_rateless(NodeState& node, const CodedPacket& packet,
                                        int64_t threshold, int64_t slot) {
  ReceiveResult r;
  if (!packet.authentic) {
    ++node.polluted_rx;
    r.outcome = ReceiveOutcome::PollutedDropped;
    return r;
  }
  if (node.decode.decoded()) {
    r.outcome = ReceiveOutcome::Ignored;
    return r;
  }
  r.outcome = node.decode.insert(packet.id) ? ReceiveOutcome::NewData
                                            : ReceiveOutcome::DuplicateData;
  if (try_decode_threshold(node.decode, threshold) && !node.decoded_at_slot)
    node.decoded_at_slot = slot;
  return r;
}

ReceiveResult receive_precode(const SchemeConfig& cfg, NodeState& node, const CodedPacket& packet,
                              int sender, const FileSpec& spec, const OverheadConfig& overhead,
                              int64_t slot) {
  ReceiveResult r;
  if (node.decode.decoded()) {
    r.outcome = ReceiveOutcome::Ignored;
    return r;
  }

  if (!cfg.verification) {
    if (packet.authentic) {
      r.outcome = node.decode.insert(packet.id) ? ReceiveOutcome::NewData
                                                : ReceiveOutcome::DuplicateData;
    } else if (node.polluted_held.insert(packet.id).second) {
      node.polluted_list.push_back(packet.id);
      r.outcome = ReceiveOutcome::NewData;
    } else {
      r.outcome = ReceiveOutcome::DuplicateData;
    }
    // An ideal decoder cannot tell which buffered packet is bad, so any
    // pollution in the buffer keeps the file unrecoverable.
    if (node.polluted_held.empty() && try_decode(node.decode, spec) && !node.decoded_at_slot)
      node.decoded_at_slot = slot;
    return r;
  }

  switch (classify(packet, node.ledger)) {
    case Verdict::Authentic:
      r.outcome = node.decode.insert(packet.id) ? ReceiveOutcome::NewData
                                                : ReceiveOutcome::DuplicateData;
      if (try_decode(node.decode, spec) && !node.decoded_at_slot) node.decoded_at_slot = slot;
      return r;
    case Verdict::Polluted:
      ++node.polluted_rx;
      r.outcome = ReceiveOutcome::PollutedDropped;
      return r;
    case Verdict::Unknown:
      if (static_cast<int>(node.quarantine.size()) >= cfg.quarantine_capacity) {
        r.resolved.emplace_back(node.quarantine.front().sender, false);
        node.quarantine.pop_front();
      }
      node.quarantine.push_back({packet, sender});
      r.outcome = ReceiveOutcome::Quarantined;
      return r;
  }
  return r;
}

}  // namespace

ReceiveResult on_receive(const SchemeConfig& cfg, NodeState& node, const CodedPacket& packet,
                         int sender, const FileSpec& spec, const OverheadConfig& overhead,
                         int64_t slot) {
  ReceiveResult r;
  if (node.role == NodeRole::Malicious || node.role == NodeRole::Source) {
    r.outcome = ReceiveOutcome::Ignored;
    return r;
  }

  if (packet.kind == PacketKind::HashInfo) {
    if (!cfg.uses_hashes() || !cfg.verification) {
      r.outcome = ReceiveOutcome::Ignored;
      return r;
    }
    if (!node.ledger.add_packet(static_cast<int>(packet.id))) {
      r.outcome = ReceiveOutcome::DuplicateHash;
      return r;
    }
    r.outcome = ReceiveOutcome::NewHash;
    promote_quarantine(cfg, node, spec, overhead, slot, r);
    return r;
  }

  switch (cfg.scheme) {
    case Scheme::WaitToDecode:
      return receive_wait_to_decode(cfg, node, packet, spec, overhead, slot);
    case Scheme::SignEveryPacket:
    case Scheme::GeniePrecode:
      return receive_verified_rateless(node, packet, decode_threshold(cfg, spec, overhead), slot);
    case Scheme::PrecodeAndHash:
    case Scheme::ProportionalForwarding:
      return receive_precode(cfg, node, packet, sender, spec, overhead, slot);
  }
  return r;
}

}  // namespace crlflood
