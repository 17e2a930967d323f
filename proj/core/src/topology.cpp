#include "crlflood/topology.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace crlflood {

namespace {

constexpr double kEndpointTolM = 1e-6;
constexpr double kRowSumTol = 1e-9;

bool same_point(const Vec2& a, const Vec2& b) { return distance(a, b) <= kEndpointTolM; }

}  // namespace

std::vector<int> LineNetwork::neighbors(int node) const {
  if (node < 0 || node >= d) throw std::out_of_range("line node out of range");
  std::vector<int> out;
  if (node > 0) out.push_back(node - 1);
  if (node + 1 < d) out.push_back(node + 1);
  return out;
}

LineNetwork build_line(int d) {
  if (d < 2) throw std::invalid_argument("line network needs at least 2 nodes");
  return LineNetwork{d};
}

int RoadGraph::sample_next(int segment, Rng& rng) const {
  const auto& row = transitions[static_cast<size_t>(segment)];
  const double u = rng.uniform();
  double acc = 0;
  for (const auto& [next, p] : row) {
    acc += p;
    if (u < acc) return next;
  }
  return row.back().first;  // guard against rounding in the row sum
}

void RoadGraph::validate() const {
  if (segments.empty()) throw std::invalid_argument("road graph has no segments");
  if (transitions.size() != segments.size())
    throw std::invalid_argument("transition rows do not match segment count");
  for (size_t i = 0; i < transitions.size(); ++i) {
    const auto& row = transitions[i];
    if (row.empty()) throw std::invalid_argument("segment " + std::to_string(i) + " has no exit");
    double sum = 0;
    for (const auto& [j, p] : row) {
      if (j < 0 || j >= segment_count())
        throw std::invalid_argument("transition target out of range");
      if (p <= 0) throw std::invalid_argument("transition probabilities must be positive");
      if (!same_point(segments[i].head, segments[static_cast<size_t>(j)].tail))
        throw std::invalid_argument("transition " + std::to_string(i) + "->" + std::to_string(j) +
                                    " does not share an intersection");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("transition row " + std::to_string(i) + " sums to " +
                                  std::to_string(sum));
  }
}

RoadGraph build_grid(int rows, int cols, double block_m, double turn_bias) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid needs at least 2x2 intersections");
  if (block_m <= 0) throw std::invalid_argument("block length must be positive");
  if (turn_bias < 0 || turn_bias > 1) throw std::invalid_argument("turn_bias must be in [0,1]");

  RoadGraph g;
  auto point = [&](int r, int c) { return Vec2{c * block_m, r * block_m}; };
  auto add_street = [&](int r1, int c1, int r2, int c2) {
    g.segments.push_back({point(r1, c1), point(r2, c2), block_m});
    g.segments.push_back({point(r2, c2), point(r1, c1), block_m});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) add_street(r, c, r, c + 1);
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c) add_street(r, c, r + 1, c);

  const int n = g.segment_count();
  // Outgoing segments per intersection, keyed by quantized coordinates.
  std::map<std::pair<int64_t, int64_t>, std::vector<int>> outgoing;
  auto key = [&](const Vec2& p) {
    return std::make_pair(static_cast<int64_t>(std::llround(p.x * 1e6)),
                          static_cast<int64_t>(std::llround(p.y * 1e6)));
  };
  for (int i = 0; i < n; ++i) outgoing[key(g.segments[static_cast<size_t>(i)].tail)].push_back(i);

  g.transitions.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const RoadSegment& seg = g.segments[static_cast<size_t>(i)];
    const auto& exits = outgoing[key(seg.head)];
    const Vec2 dir{(seg.head.x - seg.tail.x) / seg.length, (seg.head.y - seg.tail.y) / seg.length};

    int straight = -1;
    std::vector<int> turns;
    int reverse = -1;
    for (int j : exits) {
      const RoadSegment& next = g.segments[static_cast<size_t>(j)];
      if (same_point(next.head, seg.tail)) {
        reverse = j;
        continue;
      }
      const Vec2 ndir{(next.head.x - next.tail.x) / next.length,
                      (next.head.y - next.tail.y) / next.length};
      if (dir.x * ndir.x + dir.y * ndir.y > 0.999)
        straight = j;
      else
        turns.push_back(j);
    }

    auto& row = g.transitions[static_cast<size_t>(i)];
    if (straight < 0 && turns.empty()) {
      row.emplace_back(reverse, 1.0);  // dead end
    } else if (straight >= 0 && turns.empty()) {
      row.emplace_back(straight, 1.0);  // through street
    } else if (straight >= 0) {
      if (turn_bias > 0) row.emplace_back(straight, turn_bias);
      const double rest = (1.0 - turn_bias) / static_cast<double>(turns.size());
      if (rest > 0)
        for (int j : turns) row.emplace_back(j, rest);
      if (row.empty()) row.emplace_back(straight, 1.0);
    } else {
      const double p = 1.0 / static_cast<double>(turns.size());
      for (int j : turns) row.emplace_back(j, p);
    }
  }
  g.validate();
  return g;
}

Vec2 vehicle_position(const VehicleState& v, const RoadGraph& graph) {
  const RoadSegment& seg = graph.segments[static_cast<size_t>(v.segment)];
  const double f = v.offset / seg.length;
  return {seg.tail.x + (seg.head.x - seg.tail.x) * f, seg.tail.y + (seg.head.y - seg.tail.y) * f};
}

void step_mobility(std::vector<VehicleState>& vehicles, const RoadGraph& graph, double dt,
                   Rng& rng) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  for (VehicleState& v : vehicles) {
    double run = v.offset + v.speed * dt;
    while (run > graph.segments[static_cast<size_t>(v.segment)].length) {
      run -= graph.segments[static_cast<size_t>(v.segment)].length;
      v.segment = graph.sample_next(v.segment, rng);
    }
    v.offset = run;
  }
}

std::vector<VehicleState> place_vehicles(const RoadGraph& graph, int count, double speed_lo,
                                         double speed_hi, Rng& rng) {
  std::vector<double> cumulative;
  cumulative.reserve(graph.segments.size());
  double total = 0;
  for (const RoadSegment& s : graph.segments) cumulative.push_back(total += s.length);

  std::vector<VehicleState> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int seg = static_cast<int>(it - cumulative.begin());
    VehicleState v;
    v.segment = std::min(seg, graph.segment_count() - 1);
    v.offset = rng.uniform() * graph.segments[static_cast<size_t>(v.segment)].length;
    v.speed = rng.uniform(speed_lo, speed_hi);
    out.push_back(v);
  }
  return out;
}

std::vector<int> neighbors_within(const std::vector<Vec2>& positions, int center,
                                  double radius_m) {
  if (radius_m <= 0) throw std::invalid_argument("radius must be positive");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(positions.size()); ++i) {
    if (i == center) continue;
    if (distance(positions[static_cast<size_t>(center)], positions[static_cast<size_t>(i)]) <=
        radius_m)
      out.push_back(i);
  }
  return out;
}

std::vector<double> stationary_distribution(const RoadGraph& graph, double tol, int max_iter) {
  const size_t n = graph.segments.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (size_t i = 0; i < n; ++i)
      for (const auto& [j, p] : graph.transitions[i]) next[static_cast<size_t>(j)] += pi[i] * p;
    double delta = 0;
    for (size_t i = 0; i < n; ++i) delta += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (delta < tol) break;
  }
  return pi;
}

RoadGraph parse_road_graph(std::istream& in) {
  RoadGraph g;
  std::map<int, RoadSegment> segs;
  std::vector<std::tuple<int, int, double>> trans;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("road graph line " + std::to_string(lineno) + ": " + what);
    };
    if (tag == "SEG") {
      int id;
      double x1, y1, x2, y2;
      if (!(ls >> id >> x1 >> y1 >> x2 >> y2)) fail("expected: SEG id x1 y1 x2 y2");
      if (segs.count(id)) fail("duplicate segment id");
      RoadSegment s{{x1, y1}, {x2, y2}, distance({x1, y1}, {x2, y2})};
      if (s.length <= 0) fail("zero-length segment");
      segs[id] = s;
    } else if (tag == "TRANS") {
      int i, j;
      double p;
      if (!(ls >> i >> j >> p)) fail("expected: TRANS i j p");
      trans.emplace_back(i, j, p);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  const int n = static_cast<int>(segs.size());
  for (int i = 0; i < n; ++i)
    if (!segs.count(i))
      throw std::invalid_argument("segment ids must be contiguous from 0; missing " +
                                  std::to_string(i));
  g.segments.resize(static_cast<size_t>(n));
  for (auto& [id, s] : segs) g.segments[static_cast<size_t>(id)] = s;
  g.transitions.resize(static_cast<size_t>(n));
  for (const auto& [i, j, p] : trans) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::invalid_argument("TRANS references unknown segment");
    g.transitions[static_cast<size_t>(i)].emplace_back(j, p);
  }
  g.validate();
  return g;
}

RoadGraph load_road_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open road graph file: " + path);
  return parse_road_graph(in);
}

void write_road_graph(const RoadGraph& graph, std::ostream& out) {
  out << "# crlflood road graph\n";
  char buf[160];
  for (int i = 0; i < graph.segment_count(); ++i) {
    const RoadSegment& s = graph.segments[static_cast<size_t>(i)];
    std::snprintf(buf, sizeof buf, "SEG %d %.6f %.6f %.6f %.6f\n", i, s.tail.x, s.tail.y, s.head.x,
                  s.head.y);
    out << buf;
  }
  for (int i = 0; i < graph.segment_count(); ++i) {
    for (const auto& [j, p] : graph.transitions[static_cast<size_t>(i)]) {
      std::snprintf(buf, sizeof buf, "TRANS %d %d %.12f\n", i, j, p);
      out << buf;
    }
  }
}

}  // namespace crlflood
