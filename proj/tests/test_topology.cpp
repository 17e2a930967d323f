#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "crlflood/topology.hpp"
#include "helpers.hpp"

using namespace crlflood;

TEST_CASE("line network adjacency") {
  const LineNetwork pair = build_line(2);
  CHECK(pair.neighbors(0) == std::vector<int>{1});
  CHECK(pair.neighbors(1) == std::vector<int>{0});

  const LineNetwork five = build_line(5);
  CHECK(five.neighbors(2) == std::vector<int>{1, 3});

  const LineNetwork chain = build_line(31);
  for (int i = 0; i < 31; ++i) {
    std::vector<int> expect;
    if (i > 0) expect.push_back(i - 1);
    if (i < 30) expect.push_back(i + 1);
    CHECK(chain.neighbors(i) == expect);
  }
  CHECK_THROWS_AS(build_line(1), std::invalid_argument);
}

TEST_CASE("2x2 grid has 8 directed segments with stochastic rows") {
  const RoadGraph g = build_grid(2, 2, 100.0, 0.5);
  CHECK(g.segment_count() == 8);
  for (const auto& row : g.transitions) {
    double sum = 0;
    for (const auto& [j, p] : row) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("turn_bias=1 pins the straight continuation") {
  const RoadGraph g = build_grid(3, 3, 100.0, 1.0);
  // Find a segment ending at the center intersection (100,100) heading east;
  // its continuation exists, so it must get probability 1.
  for (int i = 0; i < g.segment_count(); ++i) {
    const RoadSegment& s = g.segments[static_cast<size_t>(i)];
    if (std::abs(s.head.x - 100) < 1e-9 && std::abs(s.head.y - 100) < 1e-9 &&
        s.head.x > s.tail.x) {
      const auto& row = g.transitions[static_cast<size_t>(i)];
      REQUIRE(row.size() == 1);
      CHECK(row[0].second == doctest::Approx(1.0));
      const RoadSegment& next = g.segments[static_cast<size_t>(row[0].first)];
      CHECK(next.head.x > next.tail.x);  // still heading east
      return;
    }
  }
  FAIL("no eastbound segment into the center found");
}

TEST_CASE("mobility kinematics") {
  const RoadGraph g = build_grid(2, 2, 100.0, 0.5);
  Rng rng(1);

  std::vector<VehicleState> v{{0, 0.0, 20.0}};
  step_mobility(v, g, 1.0 / 3.0, rng);
  CHECK(v[0].offset == doctest::Approx(20.0 / 3.0));
  CHECK(v[0].segment == 0);

  // 1 m from the end: the leftover 5.667 m carries onto the next segment.
  v[0] = {0, 99.0, 20.0};
  step_mobility(v, g, 1.0 / 3.0, rng);
  CHECK(v[0].offset == doctest::Approx(99.0 + 20.0 / 3.0 - 100.0));
  CHECK(v[0].segment != 0);
  // Continuity: the new segment starts where segment 0 ends.
  CHECK(distance(g.segments[static_cast<size_t>(v[0].segment)].tail, g.segments[0].head) <
        1e-9);
}

TEST_CASE("mobility keeps every offset within its segment (236 vehicles, 1e4 steps)") {
  const RoadGraph g = build_grid(10, 10, 100.0, 0.5);
  Rng rng(42);
  std::vector<VehicleState> vehicles = place_vehicles(g, 236, 15.0, 25.0, rng);
  for (int step = 0; step < 10000; ++step) {
    step_mobility(vehicles, g, 1.0 / 3.0, rng);
    if (step % 500 != 0) continue;
    for (const VehicleState& v : vehicles) {
      CHECK(v.offset >= 0.0);
      CHECK(v.offset <= g.segments[static_cast<size_t>(v.segment)].length);
    }
  }
  CHECK(vehicles.size() == 236);
  for (const VehicleState& v : vehicles) {
    CHECK(v.speed >= 15.0);
    CHECK(v.speed <= 25.0);
  }
}

TEST_CASE("neighbor query uses a closed ball") {
  const std::vector<Vec2> pos{{0, 0}, {150, 0}, {250, 0}, {200, 0}};
  const std::vector<int> nbrs = neighbors_within(pos, 0, 200.0);
  CHECK(nbrs == std::vector<int>{1, 3});  // 150 in, 250 out, 200.0 exactly in
  CHECK_THROWS_AS(neighbors_within(pos, 0, 0.0), std::invalid_argument);
}

TEST_CASE("vehicle placement is proportional to segment length") {
  // Two streets A-B (100 m) and B-C (300 m), four directed segments.
  std::istringstream in(
      "SEG 0 0 0 100 0\nSEG 1 100 0 0 0\nSEG 2 100 0 400 0\nSEG 3 400 0 100 0\n"
      "TRANS 0 2 1\nTRANS 2 3 1\nTRANS 3 1 1\nTRANS 1 0 1\n");
  const RoadGraph g = parse_road_graph(in);
  Rng rng(9);
  int long_side = 0;
  const int n = 10000;
  for (const VehicleState& v : place_vehicles(g, n, 15, 25, rng))
    if (v.segment >= 2) ++long_side;
  // 600 of 800 m lie on the long street; 3 sigma of the binomial is ~0.013.
  CHECK(std::abs(long_side / static_cast<double>(n) - 0.75) < 0.013);
}

TEST_CASE("long-run segment occupancy matches the power-iteration stationary law") {
  const RoadGraph g = build_grid(10, 10, 100.0, 0.5);
  const std::vector<double> pi = stationary_distribution(g);
  double total = 0;
  for (double p : pi) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  Rng rng(1234);

  // Monte-Carlo jump chain. Samples are strided to decorrelate so an iid
  // sigma band applies. The stride must be odd: every hop flips the
  // intersection parity, so the segment chain has period 2 and an even
  // stride would sample only one parity class.
  const int kSteps = 1000000, kStride = 63;
  std::vector<double> freq(pi.size(), 0.0);
  int seg = 0;
  int samples = 0;
  for (int s = 0; s < kSteps; ++s) {
    seg = g.sample_next(seg, rng);
    if (s % kStride == 0) {
      freq[static_cast<size_t>(seg)] += 1;
      ++samples;
    }
  }
  double tv = 0;
  for (size_t i = 0; i < pi.size(); ++i) {
    const double f = freq[i] / samples;
    // Parity alternation halves the effective sample count per segment.
    const double sigma = std::sqrt(2.0 * pi[i] * (1 - pi[i]) / samples);
    CHECK(std::abs(f - pi[i]) <= 4.0 * sigma + 1e-12);
    tv += std::abs(f - pi[i]);
  }
  // Aggregate noise floor: 360 cells at sigma ~ 6e-4 puts the expected TV
  // around 0.05; anything near 1 would mean a structural error.
  CHECK(tv / 2 < 0.1);
}

TEST_CASE("road graph text round trip") {
  const RoadGraph g = build_grid(3, 4, 150.0, 0.7);
  std::ostringstream out;
  write_road_graph(g, out);
  std::istringstream in(out.str());
  const RoadGraph g2 = parse_road_graph(in);
  REQUIRE(g2.segment_count() == g.segment_count());
  for (int i = 0; i < g.segment_count(); ++i) {
    CHECK(g2.segments[static_cast<size_t>(i)].length ==
          doctest::Approx(g.segments[static_cast<size_t>(i)].length));
    REQUIRE(g2.transitions[static_cast<size_t>(i)].size() ==
            g.transitions[static_cast<size_t>(i)].size());
  }
}

TEST_CASE("road graph parser diagnostics") {
  {
    std::istringstream in("SEG 0 0 0 100 0\nBOGUS 1 2 3\n");
    CHECK_THROWS_WITH_AS(parse_road_graph(in), doctest::Contains("line 2"),
                         std::invalid_argument);
  }
  {
    // Row does not sum to 1.
    std::istringstream in("SEG 0 0 0 100 0\nSEG 1 100 0 0 0\nTRANS 0 1 0.5\nTRANS 1 0 1\n");
    CHECK_THROWS_AS(parse_road_graph(in), std::invalid_argument);
  }
  {
    // Transition between segments that do not share an intersection.
    std::istringstream in(
        "SEG 0 0 0 100 0\nSEG 1 500 0 600 0\nTRANS 0 1 1\nTRANS 1 0 1\n");
    CHECK_THROWS_AS(parse_road_graph(in), std::invalid_argument);
  }
  {
    // Missing id 1.
    std::istringstream in("SEG 0 0 0 100 0\nSEG 2 100 0 0 0\n");
    CHECK_THROWS_AS(parse_road_graph(in), std::invalid_argument);
  }
}
