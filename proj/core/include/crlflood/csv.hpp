#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "crlflood/analysis.hpp"
#include "crlflood/engine.hpp"

namespace crlflood {

/// Deterministic double formatting shared by every CSV writer, so identical
/// runs emit byte-identical files.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// slot,seconds,fraction_decoded
inline void write_fraction_csv(const Metrics& m, std::ostream& out) {
  out << "slot,seconds,fraction_decoded\n";
  for (const auto& [slot, frac] : m.fraction_decoded)
    out << slot << ',' << csv_num(static_cast<double>(slot) * m.slot_seconds) << ','
        << csv_num(frac) << '\n';
}

/// node,decoded_slot,useful_tx,wasted_tx
inline void write_nodes_csv(const Metrics& m, std::ostream& out) {
  out << "node,decoded_slot,useful_tx,wasted_tx\n";
  for (size_t i = 0; i < m.decode_slot.size(); ++i)
    out << i << ',' << m.decode_slot[i] << ',' << m.useful_tx[i] << ',' << m.wasted_tx[i] << '\n';
}

/// hop,T_n_slots,H_next_fraction
inline void write_line_csv(const Metrics& m, std::ostream& out) {
  out << "hop,T_n_slots,H_next_fraction\n";
  for (size_t n = 0; n < m.hop_decode_slot.size(); ++n)
    out << (n + 1) << ',' << m.hop_decode_slot[n] << ','
        << csv_num(m.next_hop_fraction_at_decode[n]) << '\n';
}

/// t,h_1..h_n
inline void write_fluid_csv(const FluidRun& run, std::ostream& out) {
  const size_t n = run.samples.empty() ? 0 : run.samples.front().size();
  out << "t";
  for (size_t i = 1; i <= n; ++i) out << ",h_" << i;
  out << '\n';
  for (size_t s = 0; s < run.sample_times.size(); ++s) {
    out << csv_num(run.sample_times[s]);
    for (double h : run.samples[s]) out << ',' << csv_num(h);
    out << '\n';
  }
}

/// Header comment with T and h_inf, then i,h0_i.
inline void write_fixedpoint_csv(const FixedPointProfile& p, std::ostream& out) {
  out << "# T=" << csv_num(p.t) << " h_inf=" << csv_num(p.h_inf) << " h1_star="
      << csv_num(p.h1_star) << '\n';
  out << "i,h0_i\n";
  for (size_t i = 0; i < p.h0.size(); ++i) out << (i + 1) << ',' << csv_num(p.h0[i]) << '\n';
}

/// slot,seconds,<one fraction-decoded column per scheme>
inline void write_compare_csv(const std::vector<std::pair<std::string, Metrics>>& runs,
                              std::ostream& out) {
  out << "slot,seconds";
  for (const auto& [name, m] : runs) out << ',' << name;
  out << '\n';
  size_t max_slots = 0;
  for (const auto& [name, m] : runs) max_slots = std::max(max_slots, m.fraction_decoded.size());
  const double slot_seconds = runs.empty() ? 0.0 : runs.front().second.slot_seconds;
  for (size_t s = 0; s < max_slots; ++s) {
    out << s << ',' << csv_num(static_cast<double>(s) * slot_seconds);
    for (const auto& [name, m] : runs) {
      const double frac = s < m.fraction_decoded.size()
                              ? m.fraction_decoded[s].second
                              : (m.fraction_decoded.empty() ? 0.0
                                                            : m.fraction_decoded.back().second);
      out << ',' << csv_num(frac);
    }
    out << '\n';
  }
}

}  // namespace crlflood
