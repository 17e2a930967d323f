#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crlflood/mac.hpp"
#include "crlflood/schemes.hpp"
#include "crlflood/topology.hpp"

namespace crlflood {

enum class TopologyKind : uint8_t { Line, Grid };
enum class MacMode : uint8_t { Csma, Analytic };

struct TopologyConfig {
  TopologyKind kind = TopologyKind::Grid;

  // Line network: node 0 is the source. Spacing keeps only adjacent nodes
  // within tx range and non-adjacent transmitters outside each other's
  // interference range.
  int line_nodes = 2;
  double line_spacing_m = 180;

  // Urban grid.
  int rows = 10;
  int cols = 10;
  double block_m = 500;
  double turn_bias = 0.5;
  int vehicles = 236;
  std::vector<Vec2> sources;     // empty = four default locations
  std::string road_graph_path;   // optional explicit map instead of the grid
};

struct RunConfig {
  TopologyConfig topology;
  RadioConfig radio;
  FileSpec file;
  SchemeConfig scheme;
  OverheadConfig overhead;
  MacMode mac = MacMode::Csma;
  double malicious_fraction = 0.05;
  int64_t horizon_slots = 1000000;
  uint64_t seed = 1;

  void validate() const;
};

/// Everything a run reports. A pure function of (RunConfig, seed): rerunning
/// the same config yields an identical value.
struct Metrics {
  std::vector<NodeRole> roles;
  std::vector<int64_t> decode_slot;  // -1 = never decoded
  std::vector<int64_t> useful_tx;
  std::vector<int64_t> wasted_tx;
  std::vector<int64_t> data_delivered;  // delivered data packets, per sender
  std::vector<int64_t> polluted_rx;
  std::vector<int64_t> polluted_held;   // unverified ablation: pollution in buffer
  std::vector<int64_t> failed_decodes;  // Wait-to-Decode signature failures

  // (slot, fraction of honest relays decoded), sampled every slot.
  std::vector<std::pair<int64_t, double>> fraction_decoded;

  // Line-network extras: per hop n (1-based), the decode slot T_n, and the
  // downstream neighbor's fill |H_{n+1}(T_n)|/(k-1) at that moment.
  std::vector<int64_t> hop_decode_slot;
  std::vector<double> next_hop_fraction_at_decode;

  int64_t slots_run = 0;
  bool all_honest_decoded = false;
  double slot_seconds = 1.0 / 3.0;

  bool operator==(const Metrics&) const = default;
};

Metrics run(const RunConfig& config);

/// Median decode slot over honest relays; undecoded nodes count as +inf.
double median_decode_slot(const Metrics& m);

struct SweepSummary {
  double mean_decode_slot = 0;   // mean over runs of the per-run mean decode slot
  double std_decode_slot = 0;    // sample std of the per-run means
  double mean_final_fraction = 0;
};

struct SweepResult {
  std::vector<std::vector<Metrics>> metrics;  // [config][replication]
  std::vector<SweepSummary> summaries;
};

/// Runs each config with seeds seed+0 .. seed+replication-1, optionally in
/// parallel. Each run owns its rng streams; results are position-stable.
SweepResult sweep(std::span<const RunConfig> configs, int replication, int workers = 1);

}  // namespace crlflood
