#include "crlflood/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace crlflood {

void RunConfig::validate() const {
  file.validate();
  radio.validate();
  scheme.validate();
  if (!file.rateless()) overhead.validate(file);
  if (malicious_fraction < 0 || malicious_fraction >= 1)
    throw std::invalid_argument("malicious_fraction must be in [0,1)");
  if (horizon_slots < 1) throw std::invalid_argument("horizon_slots must be positive");
  if (topology.kind == TopologyKind::Line) {
    if (topology.line_nodes < 2) throw std::invalid_argument("line needs at least 2 nodes");
  } else {
    if (topology.rows < 2 || topology.cols < 2)
      throw std::invalid_argument("grid needs at least 2x2 intersections");
    if (topology.block_m <= 0) throw std::invalid_argument("block_m must be positive");
    if (topology.turn_bias < 0 || topology.turn_bias > 1)
      throw std::invalid_argument("turn_bias must be in [0,1]");
    if (topology.vehicles < 1) throw std::invalid_argument("need at least one vehicle");
  }
  if (mac == MacMode::Analytic) {
    if (topology.kind != TopologyKind::Line)
      throw std::invalid_argument("analytic MAC requires the line topology");
    if (malicious_fraction > 0)
      throw std::invalid_argument("analytic MAC models the attack-free chain");
    if (file.rateless())
      throw std::invalid_argument("analytic MAC requires a finite precode");
  }
  if (scheme.uses_hashes() && scheme.verification && file.rateless())
    throw std::invalid_argument("hash verification requires a finite precode");
}

namespace {

struct World {
  std::vector<NodeState> nodes;
  std::vector<Vec2> positions;
  std::vector<VehicleState> vehicles;  // grid only; vehicle v is node source_count + v
  RoadGraph graph;                     // grid only
  int source_count = 0;
  int64_t seeding_slots = 0;
  SchemeConfig scheme;  // resolved copy
};

std::vector<Vec2> default_sources(const TopologyConfig& topo) {
  // Four roadside units, each sitting mid-block 160 m off one street. Every
  // source then covers a single ~240 m road chord regardless of the block
  // length, so its reach does not balloon when the map is rescaled.
  const double b = topo.block_m;
  const double r0 = std::llround(0.25 * (topo.rows - 1)) * b + 160.0;
  const double r1 = std::llround(0.75 * (topo.rows - 1)) * b + 160.0;
  const double c0 = std::llround(0.25 * (topo.cols - 1)) * b + 0.5 * b;
  const double c1 = std::llround(0.75 * (topo.cols - 1)) * b - 0.5 * b;
  return {{c0, r0}, {c1, r0}, {c0, r1}, {c1, r1}};
}

SchemeConfig resolve_scheme(const RunConfig& cfg) {
  SchemeConfig s = cfg.scheme;
  if (s.hash_first_slots < 0) {
    if (s.uses_hashes() && s.verification) {
      const HashPacketing pk = hash_packet_count(cfg.file, cfg.overhead);
      s.hash_first_slots =
          (pk.packet_count + cfg.radio.packets_per_slot - 1) / cfg.radio.packets_per_slot;
    } else {
      s.hash_first_slots = 0;
    }
  }
  return s;
}

World build_world(const RunConfig& cfg, RngStreams& streams) {
  World w;
  w.scheme = resolve_scheme(cfg);
  w.seeding_slots = seeding_schedule(cfg.file, w.scheme, cfg.radio.slot_seconds);

  std::vector<NodeRole> roles;
  if (cfg.topology.kind == TopologyKind::Line) {
    w.source_count = 1;
    const int d = cfg.topology.line_nodes;
    roles.assign(static_cast<size_t>(d), NodeRole::Relay);
    roles[0] = NodeRole::Source;
    for (int i = 0; i < d; ++i) w.positions.push_back({i * cfg.topology.line_spacing_m, 0.0});
  } else {
    std::vector<Vec2> sources =
        cfg.topology.sources.empty() ? default_sources(cfg.topology) : cfg.topology.sources;
    w.source_count = static_cast<int>(sources.size());
    if (cfg.topology.road_graph_path.empty()) {
      w.graph = build_grid(cfg.topology.rows, cfg.topology.cols, cfg.topology.block_m,
                           cfg.topology.turn_bias);
    } else {
      w.graph = load_road_graph(cfg.topology.road_graph_path);
    }
    w.vehicles = place_vehicles(w.graph, cfg.topology.vehicles, 15.0, 25.0, streams.mobility);
    roles.assign(static_cast<size_t>(w.source_count + cfg.topology.vehicles), NodeRole::Relay);
    for (int s = 0; s < w.source_count; ++s) roles[static_cast<size_t>(s)] = NodeRole::Source;
    w.positions = sources;
    for (const VehicleState& v : w.vehicles) w.positions.push_back(vehicle_position(v, w.graph));
  }

  // Malicious nodes: a uniformly random subset of the relays.
  std::vector<int> relays;
  for (size_t i = 0; i < roles.size(); ++i)
    if (roles[i] == NodeRole::Relay) relays.push_back(static_cast<int>(i));
  const int malicious =
      static_cast<int>(std::llround(cfg.malicious_fraction * static_cast<double>(relays.size())));
  streams.adversary.shuffle(relays);
  for (int i = 0; i < malicious; ++i) roles[static_cast<size_t>(relays[static_cast<size_t>(i)])] =
      NodeRole::Malicious;

  w.nodes.reserve(roles.size());
  for (size_t i = 0; i < roles.size(); ++i)
    w.nodes.push_back(make_node(static_cast<int>(i), roles[i], w.scheme, cfg.file, cfg.overhead));
  return w;
}

class Recorder {
 public:
  Recorder(const RunConfig& cfg, const World& w) : cfg_(cfg) {
    const size_t n = w.nodes.size();
    m_.roles.resize(n);
    for (size_t i = 0; i < n; ++i) m_.roles[i] = w.nodes[i].role;
    m_.decode_slot.assign(n, -1);
    m_.useful_tx.assign(n, 0);
    m_.wasted_tx.assign(n, 0);
    m_.data_delivered.assign(n, 0);
    m_.polluted_rx.assign(n, 0);
    m_.polluted_held.assign(n, 0);
    m_.failed_decodes.assign(n, 0);
    m_.slot_seconds = cfg.radio.slot_seconds;
    for (NodeRole r : m_.roles) honest_relays_ += r == NodeRole::Relay ? 1 : 0;
  }

  void count_delivery(int tx) { ++m_.data_delivered[static_cast<size_t>(tx)]; }

  /// Call after all of a slot's deliveries are applied.
  void end_slot(int64_t slot, const World& w) {
    int decoded = 0;
    for (size_t i = 0; i < w.nodes.size(); ++i) {
      const NodeState& node = w.nodes[i];
      if (node.role == NodeRole::Relay && node.decode.decoded()) ++decoded;
      if (node.decoded_at_slot && m_.decode_slot[i] < 0) {
        m_.decode_slot[i] = *node.decoded_at_slot;
        if (cfg_.topology.kind == TopologyKind::Line &&
            i + 1 < w.nodes.size()) {
          // Lemma-1 sample: downstream fill when hop i decodes.
          line_samples_.push_back(
              {static_cast<int>(i),
               static_cast<double>(w.nodes[i + 1].decode.distinct()) /
                   static_cast<double>(cfg_.file.k - 1)});
        }
      }
    }
    m_.fraction_decoded.emplace_back(
        slot, honest_relays_ == 0
                  ? 0.0
                  : static_cast<double>(decoded) / static_cast<double>(honest_relays_));
    m_.slots_run = slot + 1;
    m_.all_honest_decoded = honest_relays_ > 0 && decoded == honest_relays_;
  }

  Metrics finish(World& w) {
    // Still-quarantined packets never resolved: account them as wasted so
    // that useful + wasted covers every delivered data packet. They go to
    // the node counters, which are copied into the metrics afterwards.
    for (NodeState& node : w.nodes)
      for (const QuarantinedPacket& q : node.quarantine)
        ++w.nodes[static_cast<size_t>(q.sender)].wasted_tx;
    for (size_t i = 0; i < w.nodes.size(); ++i) {
      m_.polluted_rx[i] = w.nodes[i].polluted_rx;
      m_.polluted_held[i] = static_cast<int64_t>(w.nodes[i].polluted_held.size());
      m_.failed_decodes[i] = w.nodes[i].failed_decodes;
    }
    if (cfg_.topology.kind == TopologyKind::Line) {
      const int d = cfg_.topology.line_nodes;
      m_.hop_decode_slot.assign(static_cast<size_t>(d - 1), -1);
      // -1 marks hops with no sample (NaN would poison operator==).
      m_.next_hop_fraction_at_decode.assign(static_cast<size_t>(d - 1), -1.0);
      for (int n = 1; n < d; ++n)
        m_.hop_decode_slot[static_cast<size_t>(n - 1)] = m_.decode_slot[static_cast<size_t>(n)];
      for (const auto& [node, frac] : line_samples_)
        m_.next_hop_fraction_at_decode[static_cast<size_t>(node - 1)] = frac;
    }
    return std::move(m_);
  }

  bool done() const { return m_.all_honest_decoded; }

 private:
  const RunConfig& cfg_;
  Metrics m_;
  int honest_relays_ = 0;
  std::vector<std::pair<int, double>> line_samples_;
};

Metrics run_analytic(const RunConfig& cfg, World& w, RngStreams& streams) {
  const int d = cfg.topology.line_nodes;
  const size_t n = static_cast<size_t>(d);
  Metrics m;
  m.roles.assign(n, NodeRole::Relay);
  m.roles[0] = NodeRole::Source;
  m.decode_slot.assign(n, -1);
  m.useful_tx.assign(n, 0);
  m.wasted_tx.assign(n, 0);
  m.data_delivered.assign(n, 0);
  m.polluted_rx.assign(n, 0);
  m.polluted_held.assign(n, 0);
  m.failed_decodes.assign(n, 0);
  m.hop_decode_slot.assign(n - 1, -1);
  m.next_hop_fraction_at_decode.assign(n - 1, -1.0);
  m.slot_seconds = cfg.radio.slot_seconds;
  (void)w;

  std::vector<DecodeState> states(n);
  int decoded = 0;
  for (int64_t slot = 0; slot < cfg.horizon_slots; ++slot) {
    // Synchronous update: every edge samples the pre-slot state.
    const std::vector<AnalyticDelivery> deliveries =
        analytic_mac_step(cfg.file, states, cfg.radio.erasure_prob, streams.channel);
    for (const AnalyticDelivery& d2 : deliveries) {
      DecodeState& ds = states[static_cast<size_t>(d2.receiver)];
      ++m.data_delivered[static_cast<size_t>(d2.receiver - 1)];
      if (ds.insert(d2.id))
        ++m.useful_tx[static_cast<size_t>(d2.receiver - 1)];
      else
        ++m.wasted_tx[static_cast<size_t>(d2.receiver - 1)];
    }
    for (int i = 1; i < d; ++i) {
      DecodeState& ds = states[static_cast<size_t>(i)];
      if (!ds.decoded() && try_decode(ds, cfg.file)) {
        m.decode_slot[static_cast<size_t>(i)] = slot;
        m.hop_decode_slot[static_cast<size_t>(i - 1)] = slot;
        ++decoded;
        if (i + 1 < d) {
          m.next_hop_fraction_at_decode[static_cast<size_t>(i - 1)] =
              static_cast<double>(states[static_cast<size_t>(i + 1)].distinct()) /
              static_cast<double>(cfg.file.k - 1);
        }
      }
    }
    m.fraction_decoded.emplace_back(slot,
                                    static_cast<double>(decoded) / static_cast<double>(d - 1));
    m.slots_run = slot + 1;
    if (decoded == d - 1) {
      m.all_honest_decoded = true;
      break;
    }
  }
  return m;
}

}  // namespace

Metrics run(const RunConfig& cfg) {
  cfg.validate();
  RngStreams streams(cfg.seed);
  World w = build_world(cfg, streams);

  if (cfg.mac == MacMode::Analytic) return run_analytic(cfg, w, streams);

  Recorder rec(cfg, w);
  const int relay_packets = cfg.radio.packets_per_slot;
  const int source_packets = source_packets_per_slot(w.scheme, cfg.radio.slot_seconds);

  std::vector<int> contenders;
  for (int64_t slot = 0; slot < cfg.horizon_slots; ++slot) {
    if (cfg.topology.kind == TopologyKind::Grid) {
      step_mobility(w.vehicles, w.graph, cfg.radio.slot_seconds, streams.mobility);
      for (size_t v = 0; v < w.vehicles.size(); ++v)
        w.positions[static_cast<size_t>(w.source_count) + v] =
            vehicle_position(w.vehicles[v], w.graph);
    }

    contenders.clear();
    for (const NodeState& node : w.nodes)
      if (has_send_intent(w.scheme, node, cfg.file, slot, w.seeding_slots))
        contenders.push_back(node.id);

    const std::vector<int> elected =
        elect_transmitters(streams.mac, contenders, w.positions, cfg.radio);

    for (int tx : elected) {
      NodeState& sender = w.nodes[static_cast<size_t>(tx)];

      std::vector<int> candidates;
      if (cfg.topology.kind == TopologyKind::Line) {
        if (tx > 0) candidates.push_back(tx - 1);
        if (tx + 1 < static_cast<int>(w.nodes.size())) candidates.push_back(tx + 1);
      } else {
        candidates = neighbors_within(w.positions, tx, cfg.radio.tx_range_m);
      }
      const std::vector<int> receivers =
          eligible_receivers(tx, candidates, elected, w.positions, cfg.radio);
      if (receivers.empty()) continue;

      const int budget = sender.role == NodeRole::Source ? source_packets : relay_packets;
      for (int p = 0; p < budget; ++p) {
        std::optional<CodedPacket> packet;
        if (sender.role == NodeRole::Malicious) {
          packet = adversary_emit(streams.adversary, cfg.file);
        } else {
          packet = select_transmission(w.scheme, sender, cfg.file, cfg.overhead, slot,
                                       streams.scheme);
        }
        if (!packet) continue;
        for (int r : receivers) {
          if (!streams.channel.bernoulli(1.0 - cfg.radio.erasure_prob)) continue;
          const ReceiveResult result = on_receive(w.scheme, w.nodes[static_cast<size_t>(r)],
                                                  *packet, tx, cfg.file, cfg.overhead, slot);
          if (packet->kind != PacketKind::HashInfo) {
            rec.count_delivery(tx);
            switch (result.outcome) {
              case ReceiveOutcome::NewData:
                ++sender.useful_tx;
                break;
              case ReceiveOutcome::DuplicateData:
              case ReceiveOutcome::PollutedDropped:
              case ReceiveOutcome::Ignored:
                ++sender.wasted_tx;
                break;
              default:
                break;  // quarantined: settled on promotion or at finish
            }
          }
          for (const auto& [orig_sender, was_useful] : result.resolved) {
            NodeState& s = w.nodes[static_cast<size_t>(orig_sender)];
            if (was_useful)
              ++s.useful_tx;
            else
              ++s.wasted_tx;
          }
        }
      }
    }

    rec.end_slot(slot, w);
    if (rec.done()) break;
  }

  Metrics m = rec.finish(w);
  for (size_t i = 0; i < w.nodes.size(); ++i) {
    m.useful_tx[i] = w.nodes[i].useful_tx;
    m.wasted_tx[i] = w.nodes[i].wasted_tx;
  }
  return m;
}

double median_decode_slot(const Metrics& m) {
  std::vector<double> times;
  for (size_t i = 0; i < m.roles.size(); ++i) {
    if (m.roles[i] != NodeRole::Relay) continue;
    times.push_back(m.decode_slot[i] < 0 ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(m.decode_slot[i]));
  }
  if (times.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(times.begin(), times.end());
  const size_t n = times.size();
  return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

SweepResult sweep(std::span<const RunConfig> configs, int replication, int workers) {
  if (replication < 1) throw std::invalid_argument("replication must be >= 1");
  SweepResult result;
  result.metrics.resize(configs.size());
  for (auto& v : result.metrics) v.resize(static_cast<size_t>(replication));

  std::vector<std::pair<size_t, int>> jobs;
  for (size_t c = 0; c < configs.size(); ++c)
    for (int r = 0; r < replication; ++r) jobs.emplace_back(c, r);

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const auto [c, r] = jobs[j];
      RunConfig cfg = configs[c];
      cfg.seed += static_cast<uint64_t>(r);
      result.metrics[c][static_cast<size_t>(r)] = run(cfg);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (size_t c = 0; c < configs.size(); ++c) {
    SweepSummary s;
    std::vector<double> means;
    double frac = 0;
    for (const Metrics& m : result.metrics[c]) {
      double sum = 0;
      int n = 0;
      for (size_t i = 0; i < m.roles.size(); ++i) {
        if (m.roles[i] == NodeRole::Relay && m.decode_slot[i] >= 0) {
          sum += static_cast<double>(m.decode_slot[i]);
          ++n;
        }
      }
      if (n > 0) means.push_back(sum / n);
      frac += m.fraction_decoded.empty() ? 0.0 : m.fraction_decoded.back().second;
    }
    s.mean_final_fraction = frac / static_cast<double>(result.metrics[c].size());
    if (!means.empty()) {
      double mu = 0;
      for (double v : means) mu += v;
      mu /= static_cast<double>(means.size());
      s.mean_decode_slot = mu;
      if (means.size() > 1) {
        double ss = 0;
        for (double v : means) ss += (v - mu) * (v - mu);
        s.std_decode_slot = std::sqrt(ss / static_cast<double>(means.size() - 1));
      }
    } else {
      s.mean_decode_slot = std::numeric_limits<double>::quiet_NaN();
      s.std_decode_slot = std::numeric_limits<double>::quiet_NaN();
    }
    result.summaries.push_back(s);
  }
  return result;
}

}  // namespace crlflood
