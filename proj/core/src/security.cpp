#include "crlflood/security.hpp"

#include <stdexcept>

#if defined(CRLFLOOD_HAVE_OPENSSL)
#include <openssl/sha.h>
#endif

namespace crlflood {

void OverheadConfig::validate(const FileSpec& spec) const {
  if (hash_bytes < 1) throw std::invalid_argument("hash_bytes must be >= 1");
  if (signature_bytes < 1) throw std::invalid_argument("signature_bytes must be >= 1");
  if (signature_bytes >= spec.packet_bytes)
    throw std::invalid_argument("signature_bytes must be smaller than packet_bytes");
}

HashPacketing hash_packet_count(const FileSpec& spec, const OverheadConfig& overhead) {
  spec.validate();
  overhead.validate(spec);
  if (spec.rateless()) throw std::invalid_argument("rateless code has no finite hash set");
  HashPacketing out;
  out.hashes_per_packet = (spec.packet_bytes - overhead.signature_bytes) / overhead.hash_bytes;
  if (out.hashes_per_packet < 1)
    throw std::invalid_argument("packet too small to carry a single hash");
  const int64_t ids = coded_id_space(spec);
  out.packet_count = static_cast<int>((ids + out.hashes_per_packet - 1) / out.hashes_per_packet);
  return out;
}

int sign_every_packet_count(const FileSpec& spec, const OverheadConfig& overhead) {
  spec.validate();
  overhead.validate(spec);
  const int64_t file_bytes = static_cast<int64_t>(spec.k) * spec.packet_bytes;
  const int payload = spec.packet_bytes - overhead.signature_bytes;
  // 10^6/744 truncates to the canonical 1344-packet figure (the ~34%
  // overhead); the trailing partial packet is not modeled.
  return static_cast<int>(file_bytes / payload);
}

HashLedger::HashLedger(const FileSpec& spec, const OverheadConfig& overhead) {
  const HashPacketing pk = hash_packet_count(spec, overhead);
  total_ = pk.packet_count;
  hashes_per_packet_ = pk.hashes_per_packet;
  got_.assign(static_cast<size_t>(total_), 0);
}

bool HashLedger::add_packet(int hash_id) {
  if (hash_id < 0 || hash_id >= total_) throw std::out_of_range("hash packet id out of range");
  if (got_[static_cast<size_t>(hash_id)]) return false;
  got_[static_cast<size_t>(hash_id)] = 1;
  held_.push_back(hash_id);
  ++received_count_;
  return true;
}

int HashLedger::sample_held(Rng& rng) const {
  if (held_.empty()) throw std::logic_error("no hash packets held");
  return held_[rng.bounded(held_.size())];
}

Verdict classify(const CodedPacket& packet, const HashLedger& ledger) {
  if (!ledger.covers(packet.id)) return Verdict::Unknown;
  return packet.authentic ? Verdict::Authentic : Verdict::Polluted;
}

CodedPacket adversary_emit(Rng& rng, const FileSpec& spec) {
  CodedPacket p;
  p.authentic = false;
  p.size_bytes = spec.packet_bytes;
  if (spec.rateless()) {
    p.kind = PacketKind::RatelessCoded;
    // Top bit marks the adversary range; honest fresh ids never set it.
    p.id = static_cast<int64_t>(rng.next_u64() >> 1) | (int64_t{1} << 62);
  } else {
    p.kind = PacketKind::DataCoded;
    p.id = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(coded_id_space(spec))));
  }
  return p;
}

std::array<uint8_t, 20> sha1_digest(std::span<const uint8_t> payload) {
  std::array<uint8_t, 20> out{};
#if defined(CRLFLOOD_HAVE_OPENSSL)
  SHA1(payload.data(), payload.size(), out.data());
#else
  // Fallback keeps the byte-size contract without a crypto dependency.
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : payload) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<uint8_t>(h >> (8 * (i % 8)));
#endif
  return out;
}

}  // namespace crlflood
