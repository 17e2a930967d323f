#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "crlflood/engine.hpp"

namespace crlflood {

/// Configuration mistakes (bad file, unknown key, out-of-range value).
/// The CLI maps these to exit code 1, runtime failures to 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The default scenario: 1 MB file in 1000 packets of 1000 bytes, M=3,
/// epsilon 0.05, 200/300 m ranges, 20 packets per 1/3 s slot, 10x10 grid
/// with 236 vehicles and four static sources, seeding rate 60 pps.
RunConfig default_config();

/// Line-oriented `key = value` config with sections
/// [file] [radio] [scheme] [topology] [adversary]; '#' starts a comment.
/// Unknown sections or keys are hard errors, reported with line numbers.
/// An empty file yields default_config().
RunConfig parse_config(std::istream& in, const std::string& origin);
RunConfig load_config(const std::string& path);

/// Applies one `section.key=value` override.
void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Key-by-key reference used by `--help`.
std::string config_reference();

}  // namespace crlflood
