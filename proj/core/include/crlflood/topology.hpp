#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crlflood/rng.hpp"

namespace crlflood {

struct Vec2 {
  double x = 0;
  double y = 0;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Multi-hop line: node 0 is the source, nodes 1..d-1 are relays; node i is
/// in range of exactly i-1 and i+1.
struct LineNetwork {
  int d = 2;

  std::vector<int> neighbors(int node) const;
};

LineNetwork build_line(int d);

struct RoadSegment {
  Vec2 tail;
  Vec2 head;
  double length = 0;
};

/// Directed road segments plus the row-stochastic turn matrix P over them.
/// P[i][j] > 0 requires segment j to start where segment i ends.
struct RoadGraph {
  std::vector<RoadSegment> segments;
  std::vector<std::vector<std::pair<int, double>>> transitions;

  int segment_count() const { return static_cast<int>(segments.size()); }
  int sample_next(int segment, Rng& rng) const;
  void validate() const;
};

/// Manhattan grid of bidirectional streets. At each intersection the
/// continuation straight ahead (when it exists and there is a choice) gets
/// probability turn_bias; the remaining mass is split uniformly over the
/// legal turns. U-turns are only allowed at dead ends.
RoadGraph build_grid(int rows, int cols, double block_m, double turn_bias);

struct VehicleState {
  int segment = 0;
  double offset = 0;  // meters from the segment tail
  double speed = 20;  // m/s, time-invariant per vehicle
};

Vec2 vehicle_position(const VehicleState& v, const RoadGraph& graph);

/// Advances every vehicle by speed*dt along its segment; when a segment end
/// is crossed the next segment is drawn from P and the leftover distance
/// carries over.
void step_mobility(std::vector<VehicleState>& vehicles, const RoadGraph& graph, double dt,
                   Rng& rng);

/// Initial placement: segments proportional to length, offset uniform along
/// the segment, speed uniform in [speed_lo, speed_hi].
std::vector<VehicleState> place_vehicles(const RoadGraph& graph, int count, double speed_lo,
                                         double speed_hi, Rng& rng);

/// All other nodes within radius_m of center (closed ball).
std::vector<int> neighbors_within(const std::vector<Vec2>& positions, int center,
                                  double radius_m);

/// Stationary distribution of P by power iteration.
std::vector<double> stationary_distribution(const RoadGraph& graph, double tol = 1e-12,
                                            int max_iter = 100000);

/// Line-oriented text format: `SEG id x1 y1 x2 y2` records followed by
/// `TRANS i j p`; '#' starts a comment. The parser validates stochasticity
/// and endpoint consistency.
RoadGraph parse_road_graph(std::istream& in);
RoadGraph load_road_graph(const std::string& path);
void write_road_graph(const RoadGraph& graph, std::ostream& out);

}  // namespace crlflood
