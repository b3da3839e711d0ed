#include "cpmb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cpmb/channel.hpp"
#include "cpmb/modem.hpp"
#include "cpmb/rng.hpp"

namespace cpmb {

namespace {

constexpr long long kChunkTrials = 256;

int popcount_label_diff(int a, int b) { return __builtin_popcount(a ^ b); }

}  // namespace

CodeConfig CodeSpec::build() const {
  CodeConfig cfg = punctured(make_code(constraint_length, generators), puncture);
  if (!puncture_matrix.empty()) {
    for (const auto& row : puncture_matrix) {
      if (static_cast<int>(row.size()) != cfg.outputs())
        throw std::invalid_argument(
            "code.puncture_matrix: each row needs one flag per generator");
      bool any = false;
      for (std::uint8_t keep : row) any = any || keep;
      if (!any)
        throw std::invalid_argument("code.puncture_matrix: a step keeps no bits");
    }
    cfg.puncture = puncture_matrix;
  }
  return cfg;
}

InterleaverSpec InterleaverConfig::build(int streams) const {
  InterleaverSpec spec;
  spec.streams = streams;
  if (spatial == "rotating") {
    spec.kind = InterleaverSpec::Kind::rotating;
  } else if (spatial == "blockwise") {
    spec.kind = InterleaverSpec::Kind::blockwise;
    spec.block_length = block_length;
  } else if (spatial == "explicit") {
    spec.kind = InterleaverSpec::Kind::explicit_map;
    spec.stream_map.reserve(stream_map.size());
    for (int s : stream_map) spec.stream_map.push_back(s - 1);
  } else {
    throw std::invalid_argument("interleaver.spatial: unknown kind " + spatial);
  }
  return spec;
}

std::vector<int> SimConfig::eta_or_default() const {
  if (!eta.empty()) return eta;
  std::vector<int> def(precoded);
  for (int i = 0; i < precoded; ++i) def[i] = i + 1;
  return def;
}

Detector detector_from_name(const std::string& name) {
  if (name == "exh") return Detector::exh;
  if (name == "csd") return Detector::csd;
  if (name == "psd") return Detector::psd;
  throw std::invalid_argument("detector: expected exh, csd, or psd, got " + name);
}

std::string detector_name(Detector d) {
  switch (d) {
    case Detector::exh: return "exh";
    case Detector::csd: return "csd";
    case Detector::psd: return "psd";
  }
  return "?";
}

void validate_config(const SimConfig& cfg) {
  if (cfg.schema != 1) throw std::invalid_argument("schema: expected 1");
  if (cfg.tx < 1 || cfg.rx < 1) throw std::invalid_argument("tx/rx: must be >= 1");
  if (cfg.streams < 1 || cfg.streams > std::min(cfg.tx, cfg.rx))
    throw std::invalid_argument("streams: need 1 <= S <= min(tx, rx)");
  if (cfg.precoded < 1 || cfg.precoded > cfg.streams)
    throw std::invalid_argument("precoded: need 1 <= P <= streams");
  if (cfg.precoded != 1 && cfg.precoded != 2 && cfg.precoded != 4)
    throw std::invalid_argument("precoded: built-in rotation family needs P in {1, 2, 4}");
  if (cfg.bits_per_symbol != 2 && cfg.bits_per_symbol != 4 &&
      cfg.bits_per_symbol != 6)
    throw std::invalid_argument("bits_per_symbol: must be 2, 4, or 6");
  if (cfg.snr_db.empty()) throw std::invalid_argument("snr_db: empty grid");
  for (std::size_t i = 1; i < cfg.snr_db.size(); ++i)
    if (cfg.snr_db[i] <= cfg.snr_db[i - 1])
      throw std::invalid_argument("snr_db: grid must be strictly increasing");
  if (cfg.burst_length < 1) throw std::invalid_argument("burst_length: must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers: must be >= 1");
  if (cfg.stop.min_bit_errors < 1 || cfg.stop.max_bits < 1)
    throw std::invalid_argument("stop: thresholds must be positive");

  if (cfg.detector == Detector::exh &&
      static_cast<double>(cfg.precoded) * cfg.bits_per_symbol > 24)
    throw std::invalid_argument("detector: exh candidate space exceeds 2^24");

  // eta validity is checked by build_precoder
  build_precoder(cfg.streams, cfg.precoded, cfg.eta_or_default());

  if (cfg.mode == SimMode::bicmb) {
    const CodeConfig code = cfg.code.build();
    const InterleaverSpec spec = cfg.interleaver.build(cfg.streams);
    const std::size_t coded = coded_length(code, cfg.frame_info_bits);
    const std::size_t group =
        static_cast<std::size_t>(cfg.streams) * cfg.bits_per_symbol;
    if (coded % group != 0)
      throw std::invalid_argument(
          "frame_info_bits: coded frame length must divide into S*m symbols");
    if (coded % static_cast<std::size_t>(spec.period()) != 0)
      throw std::invalid_argument(
          "frame_info_bits: coded frame length must divide the interleaver period");
  }
}

namespace {

using nlohmann::json;

std::uint32_t parse_octal_generator(const json& j) {
  if (j.is_string()) {
    return static_cast<std::uint32_t>(std::stoul(j.get<std::string>(), nullptr, 8));
  }
  // numeric literals are read digit-wise as octal, e.g. 133 -> 0o133
  return static_cast<std::uint32_t>(
      std::stoul(std::to_string(j.get<long long>()), nullptr, 8));
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  SimConfig cfg;
  cfg.schema = j.value("schema", 0);
  cfg.tx = j.value("tx", cfg.tx);
  cfg.rx = j.value("rx", cfg.rx);
  cfg.streams = j.value("streams", cfg.streams);
  cfg.precoded = j.value("precoded", cfg.precoded);
  if (j.contains("eta")) cfg.eta = j["eta"].get<std::vector<int>>();
  cfg.bits_per_symbol = j.value("bits_per_symbol", cfg.bits_per_symbol);
  if (j.contains("mode")) {
    const std::string m = j["mode"].get<std::string>();
    if (m == "umb") cfg.mode = SimMode::umb;
    else if (m == "bicmb") cfg.mode = SimMode::bicmb;
    else throw std::invalid_argument("mode: expected umb or bicmb");
  }
  if (j.contains("detector"))
    cfg.detector = detector_from_name(j["detector"].get<std::string>());
  if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();
  if (j.contains("stop")) {
    const json& s = j["stop"];
    cfg.stop.min_bit_errors = s.value("min_bit_errors", cfg.stop.min_bit_errors);
    cfg.stop.max_bits = s.value("max_bits", cfg.stop.max_bits);
    cfg.stop.max_trials = s.value("max_trials", cfg.stop.max_trials);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.burst_length = j.value("burst_length", cfg.burst_length);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("code")) {
    const json& c = j["code"];
    cfg.code.constraint_length =
        c.value("constraint_length", cfg.code.constraint_length);
    if (c.contains("generators")) {
      cfg.code.generators.clear();
      for (const json& g : c["generators"])
        cfg.code.generators.push_back(parse_octal_generator(g));
    }
    cfg.code.puncture = c.value("puncture", cfg.code.puncture);
    if (c.contains("puncture_matrix"))
      cfg.code.puncture_matrix =
          c["puncture_matrix"].get<std::vector<std::vector<std::uint8_t>>>();
  }
  if (j.contains("interleaver")) {
    const json& i = j["interleaver"];
    cfg.interleaver.spatial = i.value("spatial", cfg.interleaver.spatial);
    cfg.interleaver.block_length =
        i.value("block_length", cfg.interleaver.block_length);
    if (i.contains("stream_map"))
      cfg.interleaver.stream_map = i["stream_map"].get<std::vector<int>>();
    cfg.interleaver.temporal = i.value("temporal", cfg.interleaver.temporal);
  }
  cfg.frame_info_bits = j.value("frame_info_bits", cfg.frame_info_bits);
  validate_config(cfg);
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

struct TrialOut {
  long long bit_errors = 0;
  long long bits = 0;
  long long units = 0;
  double mult_sum = 0.0;
  double mult_sumsq = 0.0;
  double nodes_sum = 0.0;
  double table_mults = 0.0;
};

struct SweepContext {
  const SimConfig& cfg;
  PrecoderConfig pre;
  Constellation c;
  CodeConfig code;
  InterleaverSpec il;
  std::vector<int> stream_position;  // 0-based stream -> effective slot
};

void record_unit(TrialOut& out, double mults, double nodes) {
  out.units += 1;
  out.mult_sum += mults;
  out.mult_sumsq += mults * mults;
  out.nodes_sum += nodes;
}

TrialOut run_uncoded_trial(const SweepContext& ctx, double snr_db, Rng rng) {
  const SimConfig& cfg = ctx.cfg;
  const int s = cfg.streams;
  const int p = cfg.precoded;
  const int m = cfg.bits_per_symbol;
  const NoiseModel noise = NoiseModel::from_snr_db(snr_db, cfg.tx);

  TrialOut out;
  const ComplexMatrix h = sample_channel(cfg.rx, cfg.tx, rng);
  const ChannelRealization cr = beamform(h, s);

  std::vector<double> lambdas_eta(p);
  for (int i = 0; i < p; ++i) lambdas_eta[i] = cr.lambdas[ctx.pre.eta[i] - 1];
  PrecodedDetector det(cfg.detector, lambdas_eta, ctx.c.energy_scale,
                       ctx.pre.theta_tilde, ctx.c, /*coded_mode=*/false);
  out.table_mults += static_cast<double>(det.table_build_mults());

  const double radius = std::max(2.0 * noise.n0 * p, 1e-300);
  std::vector<int> tx_labels(s);
  std::vector<cplx> x(s);
  for (int b = 0; b < cfg.burst_length; ++b) {
    for (int l = 0; l < s; ++l) {
      tx_labels[l] = static_cast<int>(rng.next_u64() % ctx.c.points.size());
      x[l] = ctx.c.energy_scale * ctx.c.points[tx_labels[l]];
    }
    const std::vector<cplx> y = transmit(cr, ctx.pre, x, noise, rng);

    PrecodedDetector::Decision dec =
        det.detect(std::span<const cplx>(y).subspan(0, p), radius);
    double mults = static_cast<double>(dec.mults);
    double nodes = static_cast<double>(dec.nodes);

    for (int l = 0; l < p; ++l)
      out.bit_errors +=
          popcount_label_diff(tx_labels[l], ctx.c.label_of_point(dec.symbols[l]));
    for (int l = p; l < s; ++l) {
      const double lam =
          ctx.c.energy_scale * cr.lambdas[ctx.pre.omega[l - p] - 1];
      ScalarDecision sd = scalar_slice(y[l], lam, ctx.c);
      mults += static_cast<double>(sd.mults);
      out.bit_errors += popcount_label_diff(tx_labels[l], sd.label);
    }
    out.bits += static_cast<long long>(s) * m;
    record_unit(out, mults, nodes);
  }
  return out;
}

TrialOut run_coded_trial(const SweepContext& ctx, double snr_db, Rng rng) {
  const SimConfig& cfg = ctx.cfg;
  const int s = cfg.streams;
  const int p = cfg.precoded;
  const int m = cfg.bits_per_symbol;
  const NoiseModel noise = NoiseModel::from_snr_db(snr_db, cfg.tx);

  TrialOut out;
  const ComplexMatrix h = sample_channel(cfg.rx, cfg.tx, rng);
  const ChannelRealization cr = beamform(h, s);

  std::vector<double> lambdas_eta(p);
  for (int i = 0; i < p; ++i) lambdas_eta[i] = cr.lambdas[ctx.pre.eta[i] - 1];
  PrecodedDetector det(cfg.detector, lambdas_eta, ctx.c.energy_scale,
                       ctx.pre.theta_tilde, ctx.c, /*coded_mode=*/true);
  out.table_mults += static_cast<double>(det.table_build_mults());

  std::vector<std::uint8_t> info(cfg.frame_info_bits);
  for (auto& bit : info) bit = static_cast<std::uint8_t>(rng.next_u64() & 1);
  const std::vector<std::uint8_t> coded = conv_encode(info, ctx.code);

  SpatialInterleaveResult sp = spatial_interleave(coded, ctx.il);
  std::vector<std::vector<int>> perms;
  if (cfg.interleaver.temporal == "random") {
    perms.resize(s);
    for (int st = 0; st < s; ++st)
      perms[st] = random_permutation(sp.streams[st].size(), rng);
  } else if (cfg.interleaver.temporal != "identity") {
    throw std::invalid_argument("interleaver.temporal: expected random or identity");
  }
  const LocationMap locmap =
      build_location_map(sp, perms, m, ctx.stream_position, p);

  // Bits of stream st after the temporal interleaver.
  std::vector<std::vector<std::uint8_t>> stream_bits(s);
  for (int st = 0; st < s; ++st)
    stream_bits[st] = perms.empty()
                          ? sp.streams[st]
                          : apply_permutation(sp.streams[st], perms[st]);

  const int k_time = static_cast<int>(coded.size()) / (s * m);
  std::vector<std::vector<cplx>> received(k_time);
  std::vector<int> slot_stream(s);  // effective slot -> stream index
  for (int st = 0; st < s; ++st) slot_stream[ctx.stream_position[st]] = st;

  std::vector<cplx> x(s);
  for (int k = 0; k < k_time; ++k) {
    for (int slot = 0; slot < s; ++slot) {
      const auto& bits = stream_bits[slot_stream[slot]];
      int label = 0;
      for (int i = 0; i < m; ++i) label = (label << 1) | bits[k * m + i];
      x[slot] = ctx.c.energy_scale * ctx.c.points[label];
    }
    received[k] = transmit(cr, ctx.pre, x, noise, rng);
  }

  std::vector<std::array<double, 2>> metrics(coded.size());
  int loaded_time = -1;
  for (std::size_t kp = 0; kp < coded.size(); ++kp) {
    const LocationEntry& e = locmap.entries[kp];
    const std::vector<cplx>& y = received[e.time];
    if (e.position < p) {
      if (loaded_time != e.time) {
        det.set_received(std::span<const cplx>(y).subspan(0, p));
        loaded_time = e.time;
      }
      for (int b = 0; b < 2; ++b) {
        PrecodedDetector::MetricResult r = det.bit_metric(e.position, e.bit, b);
        metrics[kp][b] = r.value;
        record_unit(out, static_cast<double>(r.mults),
                    static_cast<double>(r.nodes));
      }
    } else {
      const double lam =
          ctx.c.energy_scale * cr.lambdas[ctx.pre.omega[e.position - p] - 1];
      for (int b = 0; b < 2; ++b) {
        ScalarDecision sd = scalar_bit_metric(y[e.position], lam, ctx.c, e.bit, b);
        metrics[kp][b] = sd.metric;
        record_unit(out, static_cast<double>(sd.mults), 0.0);
      }
    }
  }

  const std::vector<std::uint8_t> decoded =
      viterbi_decode(metrics, ctx.code, info.size());
  for (std::size_t i = 0; i < info.size(); ++i)
    out.bit_errors += info[i] != decoded[i];
  out.bits += static_cast<long long>(info.size());
  return out;
}

}  // namespace

SweepResult run_sweep(const SimConfig& cfg) {
  validate_config(cfg);

  SweepContext ctx{cfg,
                   build_precoder(cfg.streams, cfg.precoded, cfg.eta_or_default()),
                   build_constellation(cfg.bits_per_symbol),
                   CodeConfig{},
                   InterleaverSpec{},
                   {}};
  if (cfg.mode == SimMode::bicmb) {
    ctx.code = cfg.code.build();
    ctx.il = cfg.interleaver.build(cfg.streams);
    ctx.stream_position.resize(cfg.streams);
    for (int st = 0; st < cfg.streams; ++st) {
      const int subchannel = st + 1;
      const auto it_e =
          std::find(ctx.pre.eta.begin(), ctx.pre.eta.end(), subchannel);
      if (it_e != ctx.pre.eta.end()) {
        ctx.stream_position[st] =
            static_cast<int>(it_e - ctx.pre.eta.begin());
      } else {
        const auto it_o =
            std::find(ctx.pre.omega.begin(), ctx.pre.omega.end(), subchannel);
        ctx.stream_position[st] =
            cfg.precoded + static_cast<int>(it_o - ctx.pre.omega.begin());
      }
    }
  }

  const Rng base(cfg.seed);
  SweepResult result;
  for (std::size_t point = 0; point < cfg.snr_db.size(); ++point) {
    const double snr = cfg.snr_db[point];
    const Rng point_rng = base.substream(point);

    TrialOut agg;
    long long trials = 0;
    bool stop = false;
    while (!stop) {
      const long long remaining = cfg.stop.max_trials - trials;
      const long long n = std::min(kChunkTrials, remaining);
      if (n <= 0) break;

      std::vector<TrialOut> chunk(n);
      auto work = [&](long long lo, long long hi) {
        for (long long i = lo; i < hi; ++i) {
          Rng trial_rng = point_rng.substream(static_cast<std::uint64_t>(trials + i));
          chunk[i] = cfg.mode == SimMode::umb
                         ? run_uncoded_trial(ctx, snr, trial_rng)
                         : run_coded_trial(ctx, snr, trial_rng);
        }
      };
      const int workers = static_cast<int>(
          std::min<long long>(cfg.workers, n));
      if (workers <= 1) {
        work(0, n);
      } else {
        std::vector<std::thread> pool;
        const long long per = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          const long long lo = w * per;
          const long long hi = std::min(n, lo + per);
          if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
      }

      for (const TrialOut& t : chunk) {
        agg.bit_errors += t.bit_errors;
        agg.bits += t.bits;
        agg.units += t.units;
        agg.mult_sum += t.mult_sum;
        agg.mult_sumsq += t.mult_sumsq;
        agg.nodes_sum += t.nodes_sum;
        agg.table_mults += t.table_mults;
      }
      trials += n;
      stop = agg.bit_errors >= cfg.stop.min_bit_errors ||
             agg.bits >= cfg.stop.max_bits || trials >= cfg.stop.max_trials;
    }

    SweepPoint pt;
    pt.snr_db = snr;
    pt.trials = trials;
    pt.bit_errors = agg.bit_errors;
    pt.ber = agg.bits > 0 ? static_cast<double>(agg.bit_errors) /
                                static_cast<double>(agg.bits)
                          : 0.0;
    if (agg.units > 0) {
      pt.mean_mults = agg.mult_sum / static_cast<double>(agg.units);
      if (agg.units > 1) {
        const double var =
            (agg.mult_sumsq -
             static_cast<double>(agg.units) * pt.mean_mults * pt.mean_mults) /
            static_cast<double>(agg.units - 1);
        pt.std_mults = var > 0.0 ? std::sqrt(var) : 0.0;
      }
      pt.mean_nodes = agg.nodes_sum / static_cast<double>(agg.units);
      pt.table_build_mults = agg.table_mults / static_cast<double>(agg.units);
    }
    result.points.push_back(pt);
  }
  return result;
}

std::string to_csv(const SweepResult& result) {
  std::string out =
      "snr_db,trials,bit_errors,ber,mean_mults,std_mults,mean_nodes,"
      "table_build_mults\n";
  char line[512];
  for (const SweepPoint& p : result.points) {
    std::snprintf(line, sizeof(line), "%.10g,%lld,%lld,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  p.snr_db, p.trials, p.bit_errors, p.ber, p.mean_mults,
                  p.std_mults, p.mean_nodes, p.table_build_mults);
    out += line;
  }
  return out;
}

SlopeEstimate estimate_slope(const SweepResult& result, double lo_db,
                             double hi_db) {
  std::vector<double> xs, ys;
  for (const SweepPoint& p : result.points) {
    if (p.snr_db < lo_db || p.snr_db > hi_db) continue;
    if (p.ber <= 0.0) continue;
    xs.push_back(p.snr_db);
    ys.push_back(std::log10(p.ber));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3)
    throw std::invalid_argument(
        "estimate_slope: need at least 3 window points with positive BER");

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;

  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double fit = my + slope * (xs[i] - mx);
    ss_res += (ys[i] - fit) * (ys[i] - fit);
  }
  SlopeEstimate est;
  est.order = -10.0 * slope;
  est.points_used = n;
  if (n > 2) est.std_error = 10.0 * std::sqrt(ss_res / (n - 2) / sxx);
  return est;
}

}  // namespace cpmb
