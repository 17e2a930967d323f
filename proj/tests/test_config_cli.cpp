#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crlflood/config.hpp"
#include "crlflood/security.hpp"

using namespace crlflood;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_raw(const std::string& cmd) {
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

CmdResult run_cli(const std::string& args) {
  return run_raw(std::string(CRLFLOOD_BIN) + " " + args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("crlflood_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("empty config yields the default scenario") {
  std::istringstream in("");
  const RunConfig cfg = parse_config(in, "<empty>");
  CHECK(cfg.file.k == 1000);
  CHECK(cfg.file.packet_bytes == 1000);
  CHECK(cfg.file.m == 3);
  CHECK(cfg.radio.erasure_prob == doctest::Approx(0.05));
  CHECK(cfg.radio.tx_range_m == 200);
  CHECK(cfg.radio.interference_range_m == 300);
  CHECK(cfg.radio.packets_per_slot == 20);
  CHECK(cfg.topology.vehicles == 236);
  CHECK(cfg.topology.rows == 10);
  CHECK(cfg.topology.cols == 10);
  CHECK(cfg.scheme.seeding_rate_pps == 60);
  CHECK(cfg.scheme.seed_multiplier == 5);
  CHECK(cfg.scheme.hash_forward_prob == doctest::Approx(0.2));
  CHECK(cfg.overhead.signature_bytes == 256);
  CHECK(cfg.overhead.hash_bytes == 20);
  CHECK(cfg.malicious_fraction == doctest::Approx(0.05));
}

TEST_CASE("config parsing and diagnostics") {
  {
    std::istringstream in("[radio]\nepsilon = 1.5\n");
    CHECK_THROWS_AS(parse_config(in, "<t>"), ConfigError);
  }
  {
    std::istringstream in("[file]\nk = 500\nbogus_key = 1\n");
    try {
      parse_config(in, "<t>");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("<t>:3") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
  }
  {
    std::istringstream in("k = 500\n");
    CHECK_THROWS_AS(parse_config(in, "<t>"), ConfigError);  // key outside a section
  }
  {
    std::istringstream in("[nope]\nx = 1\n");
    CHECK_THROWS_AS(parse_config(in, "<t>"), ConfigError);
  }
  {
    std::istringstream in(
        "[file]\nM = inf\n[scheme]\nname = genie_precode\n[topology]\ntype = line\nd = 5\n");
    const RunConfig cfg = parse_config(in, "<t>");
    CHECK(cfg.file.rateless());
    CHECK(cfg.scheme.scheme == Scheme::GeniePrecode);
    CHECK(cfg.topology.kind == TopologyKind::Line);
    CHECK(cfg.topology.line_nodes == 5);
  }
  {
    std::istringstream in("[topology]\nsources = 100,200 300,400\n");
    const RunConfig cfg = parse_config(in, "<t>");
    REQUIRE(cfg.topology.sources.size() == 2);
    CHECK(cfg.topology.sources[1].x == 300);
    CHECK(cfg.topology.sources[1].y == 400);
  }
}

TEST_CASE("scheme.M override is an alias for the precode rate") {
  RunConfig cfg = default_config();
  set_config_value(cfg, "scheme.M", "4");
  CHECK(cfg.file.m == 4);
  const HashPacketing pk = hash_packet_count(cfg.file, cfg.overhead);
  CHECK(pk.packet_count == 109);  // the 11% overhead point
  CHECK_THROWS_AS(set_config_value(cfg, "scheme.nope", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(cfg, "noselector", "1"), ConfigError);
}

TEST_CASE("cli: missing config file exits 1 and names the path") {
  const CmdResult r = run_cli("simulate --config /nonexistent/cfg.ini");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("/nonexistent/cfg.ini") != std::string::npos);
}

TEST_CASE("cli: unknown subcommand exits 1") {
  CHECK(run_cli("frobnicate").exit_code == 1);
}

TEST_CASE("cli: fixedpoint prints 1/e for the rateless code") {
  const fs::path out = temp_dir("fp");
  const CmdResult r = run_cli("fixedpoint --M inf --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.367879441") != std::string::npos);
  const std::string csv = slurp(out / "fixedpoint.csv");
  CHECK(csv.find("# T=0.3678794412") != std::string::npos);
  CHECK(csv.find("i,h0_i") != std::string::npos);
}

TEST_CASE("cli: bounds table is monotone with the frozen first entry") {
  const fs::path out = temp_dir("bounds");
  const CmdResult r = run_cli("bounds --n 1..5 --M 3 --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("1.21640") != std::string::npos);
  const std::string csv = slurp(out / "bounds.csv");
  REQUIRE(csv.rfind("n,M,theorem1_bound,one_hop_asymptote", 0) == 0);
  // Five data rows for n = 1..5, with a strictly increasing bound column.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  double prev = 0;
  while (std::getline(lines, line)) {
    std::istringstream row(line);
    std::string n_str, m_str, bound_str;
    std::getline(row, n_str, ',');
    std::getline(row, m_str, ',');
    std::getline(row, bound_str, ',');
    const double bound = std::stod(bound_str);
    CHECK(bound > prev);
    prev = bound;
  }
}

TEST_CASE("cli: identical invocations produce byte-identical CSV output") {
  const fs::path out1 = temp_dir("sim1");
  const fs::path out2 = temp_dir("sim2");
  const std::string common =
      "simulate --seed 5 --horizon 120 "
      "--set topology.rows=3 --set topology.cols=3 --set topology.block_m=200 "
      "--set topology.vehicles=12 --set topology.sources=200,200 --set file.k=50 ";
  const CmdResult r1 = run_cli(common + "--out " + out1.string());
  REQUIRE(r1.exit_code == 0);
  const CmdResult r2 = run_cli(common + "--out " + out2.string());
  REQUIRE(r2.exit_code == 0);
  for (const char* name : {"fraction_decoded.csv", "nodes.csv"}) {
    const std::string a = slurp(out1 / name);
    const std::string b = slurp(out2 / name);
    CHECK(!a.empty());
    CHECK(a == b);
  }
  const std::string frac = slurp(out1 / "fraction_decoded.csv");
  CHECK(frac.rfind("slot,seconds,fraction_decoded", 0) == 0);
  const std::string nodes = slurp(out1 / "nodes.csv");
  CHECK(nodes.rfind("node,decoded_slot,useful_tx,wasted_tx", 0) == 0);
}

TEST_CASE("cli: CRLFLOOD_SEED overrides the config seed, --seed beats both") {
  const fs::path out1 = temp_dir("env1");
  const fs::path out2 = temp_dir("env2");
  const fs::path out3 = temp_dir("env3");
  const std::string common =
      "simulate --horizon 120 "
      "--set topology.rows=3 --set topology.cols=3 --set topology.block_m=200 "
      "--set topology.vehicles=12 --set topology.sources=200,200 --set file.k=50 ";
  REQUIRE(run_cli(common + "--seed 5 --out " + out1.string()).exit_code == 0);
  REQUIRE(run_raw("env CRLFLOOD_SEED=5 " + std::string(CRLFLOOD_BIN) + " " + common + "--out " +
                  out2.string())
              .exit_code == 0);
  REQUIRE(run_raw("env CRLFLOOD_SEED=99 " + std::string(CRLFLOOD_BIN) + " " + common +
                  "--seed 5 --out " + out3.string())
              .exit_code == 0);
  CHECK(slurp(out1 / "nodes.csv") == slurp(out2 / "nodes.csv"));
  CHECK(slurp(out1 / "nodes.csv") == slurp(out3 / "nodes.csv"));
}

TEST_CASE("cli: validate command reports a small deviation") {
  const CmdResult r = run_cli("validate --M 3 --epsilon 0 --k 2000 --nodes 4 --t-max 2 --points 25");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("max |H_i(t)/k - h_i(t)|") != std::string::npos);
}

TEST_CASE("cli: road graph file is consumed via the config") {
  const fs::path dir = temp_dir("road");
  const fs::path road = dir / "map.txt";
  {
    std::ofstream out(road);
    out << "SEG 0 0 0 300 0\nSEG 1 300 0 0 0\nTRANS 0 1 1\nTRANS 1 0 1\n";
  }
  std::istringstream in("[topology]\nroad_graph = " + road.string() + "\nvehicles = 5\n");
  const RunConfig cfg = parse_config(in, "<t>");
  CHECK(cfg.topology.road_graph_path == road.string());
}
