#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cpmb/detect.hpp"
#include "cpmb/fec.hpp"

namespace cpmb {

enum class SimMode { umb, bicmb };

struct StopRule {
  long long min_bit_errors = 200;
  long long max_bits = 10'000'000;
  long long max_trials = std::numeric_limits<long long>::max();
};

struct CodeSpec {
  int constraint_length = 3;
  std::vector<std::uint32_t> generators{05, 07};
  std::string puncture = "none";  // none | 2/3 | 4/5
  // Raw period x n_c pattern; overrides the named one when nonempty.
  std::vector<std::vector<std::uint8_t>> puncture_matrix;

  CodeConfig build() const;
};

struct InterleaverConfig {
  std::string spatial = "rotating";  // rotating | blockwise | explicit
  int block_length = 6;
  std::vector<int> stream_map;       // explicit: 1-based streams per position
  std::string temporal = "random";   // random | identity

  InterleaverSpec build(int streams) const;
};

struct SimConfig {
  int schema = 1;
  int tx = 2;                // N
  int rx = 2;                // M
  int streams = 2;           // S
  int precoded = 2;          // P
  std::vector<int> eta;      // 1-based; default 1..P
  int bits_per_symbol = 2;   // m
  SimMode mode = SimMode::umb;
  Detector detector = Detector::psd;
  std::vector<double> snr_db;
  StopRule stop;
  std::uint64_t seed = 1;
  int burst_length = 1;      // uncoded vector symbols per channel draw
  int workers = 1;
  CodeSpec code;
  InterleaverConfig interleaver;
  int frame_info_bits = 120;  // coded payload per frame

  std::vector<int> eta_or_default() const;
};

/// Checks cross-module consistency (stream counts, coded frame divisibility,
/// detector constraints) and throws std::invalid_argument with a message
/// naming the offending field.
void validate_config(const SimConfig& cfg);

SimConfig parse_config(const std::string& json_text);
SimConfig load_config(const std::string& path);

Detector detector_from_name(const std::string& name);
std::string detector_name(Detector d);

struct SweepPoint {
  double snr_db = 0.0;
  long long trials = 0;
  long long bit_errors = 0;
  double ber = 0.0;
  double mean_mults = 0.0;
  double std_mults = 0.0;
  double mean_nodes = 0.0;
  double table_build_mults = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Monte Carlo sweep. Trials draw their generator from (seed, point, trial),
/// the stop rule is evaluated at fixed chunk boundaries, and aggregation
/// walks trials in index order, so the output is bit-identical for any
/// worker count. Uncoded mode counts multiplications per detected vector
/// symbol, coded mode per acquired bit metric.
SweepResult run_sweep(const SimConfig& cfg);

/// CSV with columns:
/// snr_db,trials,bit_errors,ber,mean_mults,std_mults,mean_nodes,table_build_mults
std::string to_csv(const SweepResult& result);

struct SlopeEstimate {
  double order = 0.0;      // -10 x slope of log10(BER) per dB
  double std_error = 0.0;  // standard error of the order estimate
  int points_used = 0;
};

/// Least-squares diversity-order estimate over SNR points in [lo_db, hi_db]
/// with positive BER; needs at least three such points.
SlopeEstimate estimate_slope(const SweepResult& result, double lo_db,
                             double hi_db);

}  // namespace cpmb
