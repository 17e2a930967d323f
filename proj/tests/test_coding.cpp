#include <doctest.h>

#include <set>
#include <vector>

#include "crlflood/coding.hpp"
#include "helpers.hpp"

using namespace crlflood;

TEST_CASE("coded id space is M*k") {
  CHECK(coded_id_space({1000, 1000, 3}) == 3000);
  CHECK(coded_id_space({1, 1000, 2}) == 2);

  // Enumeration oracle for the direct product.
  FileSpec spec{7, 1000, 5};
  std::set<int64_t> ids;
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) ids.insert(sample_full_space(spec, rng));
  CHECK(coded_id_space(spec) == 35);
  CHECK(ids.size() == 35);
  CHECK(*ids.begin() == 0);
  CHECK(*ids.rbegin() == 34);
}

TEST_CASE("id space rejects the rateless code and bad specs") {
  FileSpec genie{1000, 1000, std::nullopt};
  CHECK_THROWS_AS(coded_id_space(genie), std::invalid_argument);
  CHECK_THROWS_AS(coded_id_space(FileSpec{0, 1000, 3}), std::invalid_argument);
  CHECK_THROWS_AS(coded_id_space(FileSpec{10, 100, 3}), std::invalid_argument);
  CHECK_THROWS_AS(coded_id_space(FileSpec{10, 1000, 1}), std::invalid_argument);
}

TEST_CASE("decode threshold") {
  FileSpec spec{1000, 1000, 3};
  DecodeState s;
  for (int i = 0; i < 999; ++i) s.insert(i);
  CHECK_FALSE(try_decode(s, spec));
  s.insert(999);
  CHECK(try_decode(s, spec));
  CHECK(s.decoded());
  CHECK(try_decode(s, spec));  // idempotent

  DecodeState tiny;
  tiny.insert(42);
  CHECK(try_decode(tiny, FileSpec{1, 1000, 2}));
}

TEST_CASE("received set grows monotonically and ignores duplicates") {
  DecodeState s;
  CHECK(s.insert(5));
  CHECK_FALSE(s.insert(5));
  CHECK(s.distinct() == 1);
  CHECK(s.contains(5));
  CHECK_FALSE(s.contains(6));
}

TEST_CASE("buffer fullness") {
  FileSpec spec{1000, 1000, 3};
  DecodeState s;
  CHECK(buffer_fullness(s, spec) == 0.0);
  for (int i = 0; i < 500; ++i) s.insert(i);
  CHECK(buffer_fullness(s, spec) == doctest::Approx(0.5));
  for (int i = 500; i < 1000; ++i) s.insert(i);
  try_decode(s, spec);
  CHECK(buffer_fullness(s, spec) == doctest::Approx(3.0));
}

TEST_CASE("sampling from a singleton buffer") {
  DecodeState s;
  s.insert(42);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(s.sample(rng) == 42);
  DecodeState empty;
  CHECK_THROWS_AS(empty.sample(rng), std::logic_error);
}

TEST_CASE("full-space sampling is uniform (chi-square, k=2 M=2)") {
  FileSpec spec{2, 1000, 2};
  Rng rng(7);
  std::vector<double> counts(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[static_cast<size_t>(sample_full_space(spec, rng))] += 1;
  // df = 3; 16.27 is the 99.9% quantile, the 3-sigma analogue.
  CHECK(testutil::chi_square(counts, std::vector<double>(4, n / 4.0)) < 16.27);
}

TEST_CASE("genie draws are always fresh and distinct across emitters") {
  GenieSource a(1), b(2);
  std::set<int64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    CHECK(seen.insert(a.next()).second);
    CHECK(seen.insert(b.next()).second);
  }
  CHECK(seen.size() == 2000);
}

TEST_CASE("every sampled id lies inside the coded space") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FileSpec spec{static_cast<int>(rng.bounded(50) + 1), 1000,
                  static_cast<int>(rng.bounded(8) + 2)};
    const int64_t space = coded_id_space(spec);
    for (int i = 0; i < 200; ++i) {
      const int64_t id = sample_full_space(spec, rng);
      CHECK(id >= 0);
      CHECK(id < space);
    }
  }
}
