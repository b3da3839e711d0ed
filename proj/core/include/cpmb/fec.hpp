#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpmb/rng.hpp"

namespace cpmb {

/// Feedforward convolutional code (k_c = 1) with optional periodic
/// puncturing. Generators are the usual octal literals; the shift register
/// holds the current input in the low bit.
struct CodeConfig {
  int constraint_length = 3;
  std::vector<std::uint32_t> generators{05, 07};
  // puncture[t][j]: keep output j at step t mod period. Empty => no puncture.
  std::vector<std::vector<std::uint8_t>> puncture;

  int outputs() const { return static_cast<int>(generators.size()); }
  int memory() const { return constraint_length - 1; }
  int states() const { return 1 << memory(); }
  int puncture_period() const { return static_cast<int>(puncture.size()); }
  bool kept(long long step, int output) const {
    if (puncture.empty()) return true;
    return puncture[step % puncture.size()][output] != 0;
  }
  double rate() const;
};

CodeConfig make_code(int constraint_length, std::vector<std::uint32_t> generators);
/// Applies one of the built-in puncturing patterns: "none", "2/3", "4/5".
CodeConfig punctured(CodeConfig base, const std::string& rate_name);

/// Coded (post-puncturing) length for info_len payload bits, including the
/// zero tail that flushes the encoder.
std::size_t coded_length(const CodeConfig& cfg, std::size_t info_len);

/// Encodes info bits, appends memory() zero tail bits, punctures.
std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> info,
                                      const CodeConfig& cfg);

/// Trellis view shared by the decoder and the error-event enumerator.
struct Trellis {
  int states = 0;
  int outputs = 0;
  // indexed by state * 2 + input
  std::vector<int> next_state;
  std::vector<std::uint32_t> out_bits;  // bit j = output j

  static Trellis build(const CodeConfig& cfg);
};

struct InterleaverSpec {
  enum class Kind { rotating, blockwise, explicit_map };
  Kind kind = Kind::rotating;
  int streams = 1;
  int block_length = 6;         // blockwise: consecutive bits per stream
  std::vector<int> stream_map;  // explicit_map: 0-based stream per position

  int period() const;
  int stream_of(long long position) const;  // 0-based coded-bit position
};

struct SpatialInterleaveResult {
  std::vector<std::vector<std::uint8_t>> streams;
  // per coded bit: (stream, position within stream)
  std::vector<std::pair<int, int>> assignment;
};

SpatialInterleaveResult spatial_interleave(std::span<const std::uint8_t> bits,
                                           const InterleaverSpec& spec);
std::vector<std::uint8_t> spatial_deinterleave(
    const std::vector<std::vector<std::uint8_t>>& streams,
    const InterleaverSpec& spec);

/// Seeded uniform permutation (Fisher-Yates); position p moves to perm[p].
std::vector<int> random_permutation(std::size_t n, Rng& rng);
std::vector<std::uint8_t> apply_permutation(std::span<const std::uint8_t> in,
                                            std::span<const int> perm);
std::vector<std::uint8_t> invert_permutation(std::span<const std::uint8_t> in,
                                             std::span<const int> perm);

/// Where coded bit k' ends up: symbol time, symbol position within the
/// effective vector, bit position in the label, plus the real-valued remap
/// (coordinate and per-dimension bit) used by the lattice detectors. The
/// real remap is only meaningful for precoded positions; real_coord is -1
/// otherwise.
struct LocationEntry {
  int time = 0;
  int position = 0;
  int bit = 0;
  int real_coord = -1;
  int real_bit = 0;
};

struct LocationMap {
  std::vector<LocationEntry> entries;
};

/// temporal_perms may be empty (identity) or hold one permutation per stream.
/// stream_position maps 0-based stream index to its 0-based slot in the
/// effective symbol vector; slots < precoded_count are precoded.
LocationMap build_location_map(const SpatialInterleaveResult& sp,
                               const std::vector<std::vector<int>>& temporal_perms,
                               int bits_per_symbol,
                               const std::vector<int>& stream_position,
                               int precoded_count);

/// Exact ML sequence decision over the trellis given per-coded-bit metric
/// pairs (gamma(k',0), gamma(k',1)) for the surviving bits in order.
/// Punctured outputs contribute zero. Ties resolve to the lexicographically
/// smaller info sequence.
std::vector<std::uint8_t> viterbi_decode(
    const std::vector<std::array<double, 2>>& metrics, const CodeConfig& cfg,
    std::size_t info_len);

}  // namespace cpmb
