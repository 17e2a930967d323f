#include "crlflood/coding.hpp"

#include <limits>

namespace crlflood {

void FileSpec::validate() const {
  if (k < 1) throw std::invalid_argument("file.k must be >= 1");
  if (packet_bytes < 300) throw std::invalid_argument("file.packet_bytes must be >= 300");
  if (m && *m < 2) throw std::invalid_argument("file.M must be >= 2 or inf");
}

int64_t coded_id_space(const FileSpec& spec) {
  spec.validate();
  if (spec.rateless()) throw std::invalid_argument("rateless code has an unbounded id space");
  return static_cast<int64_t>(*spec.m) * spec.k;
}

bool try_decode_threshold(DecodeState& state, int64_t threshold) {
  if (!state.decoded_ && state.distinct() >= threshold) state.decoded_ = true;
  return state.decoded_;
}

bool try_decode(DecodeState& state, const FileSpec& spec) {
  return try_decode_threshold(state, spec.k);
}

double buffer_fullness(const DecodeState& state, const FileSpec& spec) {
  if (state.decoded()) {
    return spec.rateless() ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(*spec.m);
  }
  return static_cast<double>(state.distinct()) / spec.k;
}

int64_t sample_full_space(const FileSpec& spec, Rng& rng) {
  return static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(coded_id_space(spec))));
}

}  // namespace crlflood
