#pragma once

#include <span>
#include <vector>

#include "crlflood/coding.hpp"
#include "crlflood/rng.hpp"
#include "crlflood/topology.hpp"

namespace crlflood {

struct RadioConfig {
  double tx_range_m = 200;
  double interference_range_m = 300;
  double erasure_prob = 0.05;
  int packets_per_slot = 20;
  double slot_seconds = 1.0 / 3.0;

  void validate() const;
};

/// Slotted CSMA/CA election: contenders are visited in a uniformly random
/// permutation and elected greedily iff no already-elected node lies within
/// the interference range (carrier-sense range equals interference range).
/// The result is a maximal independent set, deterministic given the stream.
std::vector<int> elect_transmitters(Rng& rng, std::vector<int> contenders,
                                    const std::vector<Vec2>& positions, const RadioConfig& cfg);

/// True iff `receiver` can hear `tx` this slot: within tx range and no other
/// elected transmitter within the interference range of the receiver.
bool receiver_clear(int receiver, int tx, std::span<const int> elected,
                    const std::vector<Vec2>& positions, const RadioConfig& cfg);

/// Receivers in range of tx and not blocked by a concurrent transmitter.
std::vector<int> eligible_receivers(int tx, std::span<const int> receivers,
                                    std::span<const int> elected,
                                    const std::vector<Vec2>& positions, const RadioConfig& cfg);

/// One broadcast: every eligible receiver gets the packet independently with
/// probability 1 - erasure_prob.
std::vector<int> deliver(int tx, std::span<const int> receivers, std::span<const int> elected,
                         const std::vector<Vec2>& positions, const RadioConfig& cfg, Rng& rng);

/// Idealized line-network channel matching the discrete Markov model: per
/// slot every node with a non-empty buffer forwards one uniformly chosen
/// buffered packet to its downstream neighbor only; no contention, no
/// interference, independent erasures with probability eps. The source and
/// decoded nodes draw from the full m*k space.
struct AnalyticDelivery {
  int receiver;
  int64_t id;
};

std::vector<AnalyticDelivery> analytic_mac_step(const FileSpec& spec,
                                                std::span<const DecodeState> nodes, double eps,
                                                Rng& rng);

}  // namespace crlflood
