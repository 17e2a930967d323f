#include "crlflood/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace crlflood {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

int64_t parse_int64(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

std::vector<Vec2> parse_points(const std::string& v, const std::string& key) {
  std::vector<Vec2> out;
  std::istringstream in(v);
  std::string token;
  while (in >> token) {
    const size_t comma = token.find(',');
    if (comma == std::string::npos)
      throw ConfigError(key + ": expected x,y pairs separated by spaces");
    out.push_back({parse_double(token.substr(0, comma), key),
                   parse_double(token.substr(comma + 1), key)});
  }
  if (out.empty()) throw ConfigError(key + ": expected at least one x,y pair");
  return out;
}

void apply(RunConfig& cfg, const std::string& section, const std::string& key,
           const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "file") {
    if (key == "k") cfg.file.k = parse_int(value, full);
    else if (key == "packet_bytes") cfg.file.packet_bytes = parse_int(value, full);
    else if (key == "M" || key == "m") {
      if (value == "inf" || value == "infinite")
        cfg.file.m = std::nullopt;
      else
        cfg.file.m = parse_int(value, full);
    } else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "radio") {
    if (key == "tx_range_m") cfg.radio.tx_range_m = parse_double(value, full);
    else if (key == "interference_range_m")
      cfg.radio.interference_range_m = parse_double(value, full);
    else if (key == "epsilon") cfg.radio.erasure_prob = parse_double(value, full);
    else if (key == "packets_per_slot") cfg.radio.packets_per_slot = parse_int(value, full);
    else if (key == "slot_seconds") cfg.radio.slot_seconds = parse_double(value, full);
    else if (key == "mac") {
      if (value == "csma") cfg.mac = MacMode::Csma;
      else if (value == "analytic") cfg.mac = MacMode::Analytic;
      else throw ConfigError(full + ": expected csma or analytic");
    } else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "scheme") {
    if (key == "name") {
      const auto s = scheme_from_name(value);
      if (!s) throw ConfigError(full + ": unknown scheme '" + value + "'");
      cfg.scheme.scheme = *s;
    } else if (key == "M" || key == "m") {
      apply(cfg, "file", "M", value);  // alias: the precode rate is file-level
    } else if (key == "hash_first_slots") cfg.scheme.hash_first_slots = parse_int(value, full);
    else if (key == "hash_forward_prob") cfg.scheme.hash_forward_prob = parse_double(value, full);
    else if (key == "seed_multiplier") cfg.scheme.seed_multiplier = parse_double(value, full);
    else if (key == "seeding_rate_pps") cfg.scheme.seeding_rate_pps = parse_double(value, full);
    else if (key == "quarantine_capacity")
      cfg.scheme.quarantine_capacity = parse_int(value, full);
    else if (key == "verification") cfg.scheme.verification = parse_bool(value, full);
    else if (key == "signature_bytes") cfg.overhead.signature_bytes = parse_int(value, full);
    else if (key == "hash_bytes") cfg.overhead.hash_bytes = parse_int(value, full);
    else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "topology") {
    if (key == "type") {
      if (value == "line") cfg.topology.kind = TopologyKind::Line;
      else if (value == "grid") cfg.topology.kind = TopologyKind::Grid;
      else throw ConfigError(full + ": expected line or grid");
    } else if (key == "line_nodes" || key == "d")
      cfg.topology.line_nodes = parse_int(value, full);
    else if (key == "line_spacing_m") cfg.topology.line_spacing_m = parse_double(value, full);
    else if (key == "rows") cfg.topology.rows = parse_int(value, full);
    else if (key == "cols") cfg.topology.cols = parse_int(value, full);
    else if (key == "block_m") cfg.topology.block_m = parse_double(value, full);
    else if (key == "turn_bias") cfg.topology.turn_bias = parse_double(value, full);
    else if (key == "vehicles") cfg.topology.vehicles = parse_int(value, full);
    else if (key == "sources") cfg.topology.sources = parse_points(value, full);
    else if (key == "road_graph") cfg.topology.road_graph_path = value;
    else if (key == "horizon_slots") cfg.horizon_slots = parse_int64(value, full);
    else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "adversary") {
    if (key == "malicious_fraction") cfg.malicious_fraction = parse_double(value, full);
    else throw ConfigError("unknown key '" + full + "'");
  } else {
    throw ConfigError("unknown section '[" + section + "]'");
  }
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig cfg = default_config();
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section != "file" && section != "radio" && section != "scheme" &&
            section != "topology" && section != "adversary")
          throw ConfigError("unknown section '[" + section + "]'");
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      if (section.empty()) throw ConfigError("key outside of any [section]");
      apply(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override key must look like section.key: '" + dotted_key + "'");
  apply(cfg, dotted_key.substr(0, dot), dotted_key.substr(dot + 1), value);
}

std::string config_reference() {
  return
      "[file]      k (1000), packet_bytes (1000), M (3 | 'inf')\n"
      "[radio]     tx_range_m (200), interference_range_m (300), epsilon (0.05),\n"
      "            packets_per_slot (20), slot_seconds (0.3333), mac (csma|analytic)\n"
      "[scheme]    name (precode_and_hash|wait_to_decode|sign_every_packet|\n"
      "                  genie_precode|proportional_forwarding),\n"
      "            M (alias of file.M), hash_first_slots (-1 = auto),\n"
      "            hash_forward_prob (0.2), seed_multiplier (5),\n"
      "            seeding_rate_pps (60), quarantine_capacity (1024),\n"
      "            verification (on), signature_bytes (256), hash_bytes (20)\n"
      "[topology]  type (grid|line), rows (10), cols (10), block_m (500),\n"
      "            turn_bias (0.5), vehicles (236), sources (x,y pairs),\n"
      "            road_graph (path), line_nodes (2), line_spacing_m (180),\n"
      "            horizon_slots (1000000)\n"
      "[adversary] malicious_fraction (0.05)\n";
}

}  // namespace crlflood
