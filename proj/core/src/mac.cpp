#include "crlflood/mac.hpp"

#include <stdexcept>

namespace crlflood {

void RadioConfig::validate() const {
  if (tx_range_m <= 0) throw std::invalid_argument("tx_range_m must be positive");
  if (interference_range_m < tx_range_m)
    throw std::invalid_argument("interference_range_m must be >= tx_range_m");
  if (erasure_prob < 0 || erasure_prob >= 1)
    throw std::invalid_argument("epsilon must be in [0,1)");
  if (packets_per_slot < 1) throw std::invalid_argument("packets_per_slot must be >= 1");
  if (slot_seconds <= 0) throw std::invalid_argument("slot_seconds must be positive");
}

std::vector<int> elect_transmitters(Rng& rng, std::vector<int> contenders,
                                    const std::vector<Vec2>& positions, const RadioConfig& cfg) {
  rng.shuffle(contenders);
  std::vector<int> elected;
  for (int c : contenders) {
    bool clear = true;
    for (int e : elected) {
      if (distance(positions[static_cast<size_t>(c)], positions[static_cast<size_t>(e)]) <=
          cfg.interference_range_m) {
        clear = false;
        break;
      }
    }
    if (clear) elected.push_back(c);
  }
  return elected;
}

bool receiver_clear(int receiver, int tx, std::span<const int> elected,
                    const std::vector<Vec2>& positions, const RadioConfig& cfg) {
  const Vec2& r = positions[static_cast<size_t>(receiver)];
  if (distance(positions[static_cast<size_t>(tx)], r) > cfg.tx_range_m) return false;
  for (int e : elected) {
    if (e == tx) continue;
    if (distance(positions[static_cast<size_t>(e)], r) <= cfg.interference_range_m) return false;
  }
  return true;
}

std::vector<int> eligible_receivers(int tx, std::span<const int> receivers,
                                    std::span<const int> elected,
                                    const std::vector<Vec2>& positions, const RadioConfig& cfg) {
  std::vector<int> out;
  for (int r : receivers) {
    if (r == tx) continue;
    if (receiver_clear(r, tx, elected, positions, cfg)) out.push_back(r);
  }
  return out;
}

std::vector<int> deliver(int tx, std::span<const int> receivers, std::span<const int> elected,
                         const std::vector<Vec2>& positions, const RadioConfig& cfg, Rng& rng) {
  std::vector<int> got;
  for (int r : eligible_receivers(tx, receivers, elected, positions, cfg)) {
    if (rng.bernoulli(1.0 - cfg.erasure_prob)) got.push_back(r);
  }
  return got;
}

std::vector<AnalyticDelivery> analytic_mac_step(const FileSpec& spec,
                                                std::span<const DecodeState> nodes, double eps,
                                                Rng& rng) {
  if (nodes.size() < 2) throw std::invalid_argument("line network needs at least 2 nodes");
  std::vector<AnalyticDelivery> out;
  for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
    const DecodeState& up = nodes[static_cast<size_t>(i - 1)];
    const DecodeState& down = nodes[static_cast<size_t>(i)];
    if (down.decoded()) continue;
    int64_t id;
    if (i == 1 || up.decoded()) {
      id = sample_full_space(spec, rng);  // the file holder re-encodes
    } else if (up.empty()) {
      continue;
    } else {
      id = up.sample(rng);
    }
    if (rng.bernoulli(1.0 - eps)) out.push_back({i, id});
  }
  return out;
}

}  // namespace crlflood
