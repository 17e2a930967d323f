// crlflood: secure content distribution simulator and analysis toolkit.
//
// Subcommands: simulate, fluid, fixedpoint, bounds, compare, validate.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crlflood/analysis.hpp"
#include "crlflood/config.hpp"
#include "crlflood/csv.hpp"
#include "crlflood/engine.hpp"
#include "crlflood/security.hpp"

namespace fs = std::filesystem;
using namespace crlflood;

namespace {

constexpr const char* kCsvDoc =
    "CSV schemas (all files carry a header row; columns are stable):\n"
    "  fraction_decoded.csv  slot,seconds,fraction_decoded\n"
    "  nodes.csv             node,decoded_slot,useful_tx,wasted_tx  (-1 = never)\n"
    "  line.csv              hop,T_n_slots,H_next_fraction\n"
    "  fluid.csv             t,h_1..h_n\n"
    "  fixedpoint.csv        '# T=.. h_inf=..' comment, then i,h0_i\n"
    "  compare.csv           slot,seconds,<one column per scheme>\n"
    "  bounds.csv            n,M,theorem1_bound,one_hop_asymptote\n"
    "\nThe environment variable CRLFLOOD_SEED overrides the configured seed;\n"
    "an explicit --seed beats both.\n";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::optional<int64_t> horizon;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (key = value sections)");
  cmd->add_option("--out", opts.out_dir, "Output directory for CSV files")
      ->capture_default_str();
  cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set scheme.M=4");
  cmd->add_option("--seed", opts.seed, "Run seed (beats config and CRLFLOOD_SEED)");
  cmd->add_option("--horizon", opts.horizon, "Horizon in slots");
}

RunConfig make_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty() ? default_config() : load_config(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (const char* env = std::getenv("CRLFLOOD_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("CRLFLOOD_SEED is not an integer: " + std::string(env));
    }
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.horizon) cfg.horizon_slots = *opts.horizon;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
  fs::create_directories(opts.out_dir);
  const fs::path p = fs::path(opts.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  std::cout << "wrote " << p.string() << "\n";
  return out;
}

double parse_m_value(const std::string& s) {
  if (s == "inf" || s == "infinite") return kInfiniteM;
  return std::stod(s);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t end = s.find(sep, start);
    if (end == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

int cmd_simulate(const CommonOpts& opts) {
  const RunConfig cfg = make_config(opts);
  const Metrics m = run(cfg);
  {
    auto out = open_out(opts, "fraction_decoded.csv");
    write_fraction_csv(m, out);
  }
  {
    auto out = open_out(opts, "nodes.csv");
    write_nodes_csv(m, out);
  }
  if (cfg.topology.kind == TopologyKind::Line) {
    auto out = open_out(opts, "line.csv");
    write_line_csv(m, out);
  }
  std::cout << "slots=" << m.slots_run << " all_honest_decoded="
            << (m.all_honest_decoded ? "yes" : "no")
            << " median_decode_slot=" << median_decode_slot(m) << "\n";
  return 0;
}

int cmd_fluid(const CommonOpts& opts, const std::string& model, const std::string& m_str,
              int nodes, double t_end, double dt, int stride, int max_rounds) {
  FluidRun fr;
  if (model == "proportional") {
    fr = proportional_fluid_integrate(nodes, t_end, dt, {}, stride, max_rounds);
  } else if (model == "precode") {
    fr = fluid_integrate(parse_m_value(m_str), nodes, t_end, dt, {}, stride, max_rounds);
  } else {
    throw ConfigError("--model must be precode or proportional");
  }
  auto out = open_out(opts, "fluid.csv");
  write_fluid_csv(fr, out);
  std::cout << "rounds=" << fr.round_durations.size();
  if (!fr.round_durations.empty()) {
    std::cout << " last_round=" << csv_num(fr.round_durations.back());
    double acc = 0;
    for (double r : fr.round_durations) acc += r;
    std::cout << " mean_round=" << csv_num(acc / static_cast<double>(fr.round_durations.size()));
  }
  std::cout << "\n";
  return 0;
}

int cmd_fixedpoint(const CommonOpts& opts, const std::string& m_str, const std::string& t_str,
                   int depth) {
  const double m = parse_m_value(m_str);
  const FixedPoint fp = solve_tf(m, 1e-12);
  const double t = t_str.empty() ? fp.t_f : std::stod(t_str);
  const FixedPointProfile profile = fixed_point_profile(m, t, depth);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "T^F(M) = %.9f\nh_inf   = %.9f\nT       = %.9f\nh_1(0)  = %.9f\nh1_star = %.9f\n",
                fp.t_f, profile.h_inf, profile.t, profile.h0.empty() ? 0.0 : profile.h0.front(),
                profile.h1_star);
  std::cout << buf;
  auto out = open_out(opts, "fixedpoint.csv");
  write_fixedpoint_csv(profile, out);
  return 0;
}

int cmd_bounds(const CommonOpts& opts, const std::string& n_range, const std::string& m_list,
               double eps) {
  int n_lo = 1, n_hi = 1;
  const size_t dots = n_range.find("..");
  if (dots == std::string::npos) {
    n_lo = n_hi = std::stoi(n_range);
  } else {
    n_lo = std::stoi(n_range.substr(0, dots));
    n_hi = std::stoi(n_range.substr(dots + 2));
  }
  if (n_lo < 1 || n_hi < n_lo) throw ConfigError("--n expects N or A..B with 1 <= A <= B");

  std::vector<double> ms;
  for (const std::string& tok : split(m_list, ','))
    if (!tok.empty()) ms.push_back(parse_m_value(tok));
  if (ms.empty()) throw ConfigError("--M expects a comma-separated list");

  auto out = open_out(opts, "bounds.csv");
  out << "n,M,theorem1_bound,one_hop_asymptote\n";
  std::cout << "   n        M   theorem1     one-hop(eps=" << eps << ")\n";
  for (double m : ms) {
    for (int n = n_lo; n <= n_hi; ++n) {
      const double bound = theorem1_bound(n, m);
      const double hop = one_hop_asymptote(m, eps);
      out << n << ',' << (std::isinf(m) ? "inf" : csv_num(m)) << ',' << csv_num(bound) << ','
          << csv_num(hop) << '\n';
      char buf[128];
      std::snprintf(buf, sizeof buf, "%4d %8s   %.5f      %.5f\n", n,
                    std::isinf(m) ? "inf" : csv_num(m).c_str(), bound, hop);
      std::cout << buf;
    }
  }
  return 0;
}

int cmd_compare(const CommonOpts& opts) {
  const RunConfig base = make_config(opts);
  std::vector<std::pair<std::string, Metrics>> results;
  for (Scheme s : {Scheme::PrecodeAndHash, Scheme::WaitToDecode, Scheme::SignEveryPacket,
                   Scheme::GeniePrecode, Scheme::ProportionalForwarding}) {
    RunConfig cfg = base;
    cfg.scheme.scheme = s;
    if (cfg.scheme.rateless_data()) cfg.file.m = std::nullopt;
    cfg.validate();
    results.emplace_back(scheme_name(s), run(cfg));
    const Metrics& m = results.back().second;
    std::cout << scheme_name(s) << ": median_decode_slot=" << median_decode_slot(m)
              << " final_fraction="
              << (m.fraction_decoded.empty() ? 0.0 : m.fraction_decoded.back().second) << "\n";
  }
  auto out = open_out(opts, "compare.csv");
  write_compare_csv(results, out);
  return 0;
}

int cmd_validate(const CommonOpts& opts, double m, double eps, int k, int nodes, double t_max,
                 int points, uint64_t seed) {
  (void)opts;
  std::vector<double> grid;
  for (int i = 1; i <= points; ++i)
    grid.push_back(t_max * static_cast<double>(i) / static_cast<double>(points));
  const double dev = discrete_vs_fluid(m, eps, k, nodes, grid, seed);
  std::cout << "max |H_i(t)/k - h_i(t)| over i<=" << nodes << ", t<=" << t_max << ": "
            << csv_num(dev) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crlflood: secure content distribution in vehicular networks"};
  app.require_subcommand(1);
  app.footer(std::string(kCsvDoc) + "\nConfig keys (defaults in parentheses):\n" +
             config_reference());

  CommonOpts sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "Run one simulation, write metrics CSVs");
  add_common(sim, sim_opts);

  CommonOpts fluid_opts;
  std::string fluid_model = "precode", fluid_m = "3";
  int fluid_nodes = 16, fluid_stride = 10, fluid_rounds = 1 << 30;
  double fluid_t_end = 10, fluid_dt = 1e-4;
  CLI::App* fluid = app.add_subcommand("fluid", "Integrate the fluid-limit ODE system");
  add_common(fluid, fluid_opts);
  fluid->add_option("--model", fluid_model, "precode | proportional")->capture_default_str();
  fluid->add_option("--M", fluid_m, "Inverse precode rate (number or 'inf')")
      ->capture_default_str();
  fluid->add_option("--nodes", fluid_nodes, "Chain depth")->capture_default_str();
  fluid->add_option("--t-end", fluid_t_end, "Integration end time")->capture_default_str();
  fluid->add_option("--dt", fluid_dt, "RK4 step")->capture_default_str();
  fluid->add_option("--stride", fluid_stride, "Record every Nth step (0 = crossings only)")
      ->capture_default_str();
  fluid->add_option("--rounds", fluid_rounds, "Stop after this many decode rounds");

  CommonOpts fp_opts;
  std::string fp_m = "inf", fp_t;
  int fp_depth = 64;
  CLI::App* fixedpoint =
      app.add_subcommand("fixedpoint", "Solve T^F(M) and emit the fixed-point profile");
  add_common(fixedpoint, fp_opts);
  fixedpoint->add_option("--M", fp_m, "Inverse precode rate (number or 'inf')")
      ->capture_default_str();
  fixedpoint->add_option("--T", fp_t, "Round length (default: T^F(M))");
  fixedpoint->add_option("--depth", fp_depth, "Profile depth")->capture_default_str();

  CommonOpts bounds_opts;
  std::string bounds_n = "1..10", bounds_m = "3";
  double bounds_eps = 0.05;
  CLI::App* bounds = app.add_subcommand("bounds", "Closed-form delay bound tables");
  add_common(bounds, bounds_opts);
  bounds->add_option("--n", bounds_n, "Hop range, e.g. 1..30")->capture_default_str();
  bounds->add_option("--M", bounds_m, "Comma-separated M values ('inf' allowed)")
      ->capture_default_str();
  bounds->add_option("--epsilon", bounds_eps, "Erasure probability")->capture_default_str();

  CommonOpts cmp_opts;
  CLI::App* compare =
      app.add_subcommand("compare", "Run all five schemes on a shared topology and seed");
  add_common(compare, cmp_opts);

  CommonOpts val_opts;
  double val_m = 3, val_eps = 0, val_tmax = 3.0;
  int val_k = 10000, val_nodes = 5, val_points = 60;
  uint64_t val_seed = 1;
  CLI::App* validate = app.add_subcommand("validate", "Discrete chain vs fluid limit deviation");
  add_common(validate, val_opts);
  validate->add_option("--M", val_m, "Inverse precode rate (finite)")->capture_default_str();
  validate->add_option("--epsilon", val_eps, "Erasure probability")->capture_default_str();
  validate->add_option("--k", val_k, "File size in packets")->capture_default_str();
  validate->add_option("--nodes", val_nodes, "Chain depth to compare")->capture_default_str();
  validate->add_option("--t-max", val_tmax, "Scaled-time horizon")->capture_default_str();
  validate->add_option("--points", val_points, "Grid points")->capture_default_str();
  validate->add_option("--rng-seed", val_seed, "Discrete-chain seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags/args are configuration errors
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (fluid->parsed())
      return cmd_fluid(fluid_opts, fluid_model, fluid_m, fluid_nodes, fluid_t_end, fluid_dt,
                       fluid_stride, fluid_rounds);
    if (fixedpoint->parsed()) return cmd_fixedpoint(fp_opts, fp_m, fp_t, fp_depth);
    if (bounds->parsed()) return cmd_bounds(bounds_opts, bounds_n, bounds_m, bounds_eps);
    if (compare->parsed()) return cmd_compare(cmp_opts);
    if (validate->parsed())
      return cmd_validate(val_opts, val_m, val_eps, val_k, val_nodes, val_tmax, val_points,
                          val_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
