#include "cpmb/fec.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cpmb {

namespace {

int parity(std::uint32_t x) { return __builtin_popcount(x) & 1; }

}  // namespace

double CodeConfig::rate() const {
  if (puncture.empty()) return 1.0 / outputs();
  long long survivors = 0;
  for (const auto& row : puncture)
    for (std::uint8_t keep : row) survivors += keep ? 1 : 0;
  return static_cast<double>(puncture.size()) / static_cast<double>(survivors);
}

CodeConfig make_code(int constraint_length, std::vector<std::uint32_t> generators) {
  if (constraint_length < 2 || constraint_length > 16)
    throw std::invalid_argument("make_code: unsupported constraint length");
  if (generators.empty())
    throw std::invalid_argument("make_code: need at least one generator");
  const std::uint32_t mask = (1u << constraint_length) - 1;
  for (std::uint32_t g : generators)
    if (g == 0 || (g & ~mask) != 0)
      throw std::invalid_argument("make_code: generator out of range");
  CodeConfig cfg;
  cfg.constraint_length = constraint_length;
  cfg.generators = std::move(generators);
  return cfg;
}

CodeConfig punctured(CodeConfig base, const std::string& rate_name) {
  if (base.outputs() != 2)
    throw std::invalid_argument("punctured: built-in patterns assume a rate-1/2 mother code");
  if (rate_name == "none" || rate_name == "1/2") {
    base.puncture.clear();
  } else if (rate_name == "2/3") {
    base.puncture = {{1, 1}, {1, 0}};
  } else if (rate_name == "4/5") {
    base.puncture = {{1, 1}, {1, 0}, {1, 0}, {1, 0}};
  } else {
    throw std::invalid_argument("punctured: unknown rate " + rate_name);
  }
  for (const auto& row : base.puncture) {
    bool any = false;
    for (std::uint8_t keep : row) any = any || keep;
    if (!any) throw std::invalid_argument("punctured: a step keeps no bits");
  }
  return base;
}

std::size_t coded_length(const CodeConfig& cfg, std::size_t info_len) {
  const std::size_t steps = info_len + cfg.memory();
  std::size_t n = 0;
  for (std::size_t t = 0; t < steps; ++t)
    for (int j = 0; j < cfg.outputs(); ++j)
      if (cfg.kept(static_cast<long long>(t), j)) ++n;
  return n;
}

std::vector<std::uint8_t> conv_encode(std::span<const std::uint8_t> info,
                                      const CodeConfig& cfg) {
  std::vector<std::uint8_t> out;
  out.reserve(coded_length(cfg, info.size()));
  std::uint32_t reg = 0;
  const std::uint32_t mask = (1u << cfg.constraint_length) - 1;
  const std::size_t steps = info.size() + cfg.memory();
  for (std::size_t t = 0; t < steps; ++t) {
    const std::uint32_t bit = t < info.size() ? (info[t] & 1u) : 0u;
    reg = ((reg << 1) | bit) & mask;
    for (int j = 0; j < cfg.outputs(); ++j) {
      if (!cfg.kept(static_cast<long long>(t), j)) continue;
      out.push_back(static_cast<std::uint8_t>(parity(reg & cfg.generators[j])));
    }
  }
  return out;
}

Trellis Trellis::build(const CodeConfig& cfg) {
  Trellis tr;
  tr.states = cfg.states();
  tr.outputs = cfg.outputs();
  tr.next_state.resize(tr.states * 2);
  tr.out_bits.resize(tr.states * 2);
  const std::uint32_t state_mask = (1u << cfg.memory()) - 1;
  for (int s = 0; s < tr.states; ++s) {
    for (int input = 0; input < 2; ++input) {
      const std::uint32_t reg = (static_cast<std::uint32_t>(s) << 1) | input;
      tr.next_state[s * 2 + input] = static_cast<int>(reg & state_mask);
      std::uint32_t bits = 0;
      for (int j = 0; j < cfg.outputs(); ++j)
        bits |= static_cast<std::uint32_t>(parity(reg & cfg.generators[j])) << j;
      tr.out_bits[s * 2 + input] = bits;
    }
  }
  return tr;
}

int InterleaverSpec::period() const {
  switch (kind) {
    case Kind::rotating:
      return streams;
    case Kind::blockwise:
      return streams * block_length;
    case Kind::explicit_map:
      return static_cast<int>(stream_map.size());
  }
  return streams;
}

int InterleaverSpec::stream_of(long long position) const {
  const long long phase = position % period();
  switch (kind) {
    case Kind::rotating:
      return static_cast<int>(phase);
    case Kind::blockwise:
      return static_cast<int>(phase / block_length);
    case Kind::explicit_map:
      return stream_map[static_cast<std::size_t>(phase)];
  }
  return 0;
}

SpatialInterleaveResult spatial_interleave(std::span<const std::uint8_t> bits,
                                           const InterleaverSpec& spec) {
  if (spec.streams < 1)
    throw std::invalid_argument("spatial_interleave: need at least one stream");
  const int period = spec.period();
  if (period <= 0 || bits.size() % static_cast<std::size_t>(period) != 0)
    throw std::invalid_argument(
        "spatial_interleave: bit count must be a multiple of the interleaver period");
  if (spec.kind == InterleaverSpec::Kind::explicit_map) {
    std::vector<int> count(spec.streams, 0);
    for (int s : spec.stream_map) {
      if (s < 0 || s >= spec.streams)
        throw std::invalid_argument("spatial_interleave: stream map entry out of range");
      ++count[s];
    }
    for (int c : count)
      if (c != period / spec.streams)
        throw std::invalid_argument("spatial_interleave: stream map is unbalanced");
  }

  SpatialInterleaveResult out;
  out.streams.resize(spec.streams);
  out.assignment.resize(bits.size());
  for (std::size_t u = 0; u < bits.size(); ++u) {
    const int s = spec.stream_of(static_cast<long long>(u));
    out.assignment[u] = {s, static_cast<int>(out.streams[s].size())};
    out.streams[s].push_back(bits[u]);
  }
  return out;
}

std::vector<std::uint8_t> spatial_deinterleave(
    const std::vector<std::vector<std::uint8_t>>& streams,
    const InterleaverSpec& spec) {
  std::size_t n = 0;
  for (const auto& st : streams) n += st.size();
  std::vector<std::uint8_t> bits(n);
  std::vector<std::size_t> cursor(streams.size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    const int s = spec.stream_of(static_cast<long long>(u));
    bits[u] = streams[s][cursor[s]++];
  }
  return bits;
}

std::vector<int> random_permutation(std::size_t n, Rng& rng) {
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::uint8_t> apply_permutation(std::span<const std::uint8_t> in,
                                            std::span<const int> perm) {
  if (in.size() != perm.size())
    throw std::invalid_argument("apply_permutation: size mismatch");
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[perm[i]] = in[i];
  return out;
}

std::vector<std::uint8_t> invert_permutation(std::span<const std::uint8_t> in,
                                             std::span<const int> perm) {
  if (in.size() != perm.size())
    throw std::invalid_argument("invert_permutation: size mismatch");
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
  return out;
}

LocationMap build_location_map(const SpatialInterleaveResult& sp,
                               const std::vector<std::vector<int>>& temporal_perms,
                               int bits_per_symbol,
                               const std::vector<int>& stream_position,
                               int precoded_count) {
  if (bits_per_symbol <= 0 || bits_per_symbol % 2 != 0)
    throw std::invalid_argument("build_location_map: bits per symbol must be even");
  const int half = bits_per_symbol / 2;
  LocationMap map;
  map.entries.resize(sp.assignment.size());
  for (std::size_t kp = 0; kp < sp.assignment.size(); ++kp) {
    const auto [s, pos] = sp.assignment[kp];
    const int pos_t = temporal_perms.empty() ? pos : temporal_perms[s][pos];
    LocationEntry e;
    e.time = pos_t / bits_per_symbol;
    e.bit = pos_t % bits_per_symbol;
    e.position = stream_position[s];
    e.real_bit = e.bit % half;
    if (e.position < precoded_count)
      e.real_coord = 2 * e.position + (e.bit < half ? 0 : 1);
    map.entries[kp] = e;
  }
  return map;
}

std::vector<std::uint8_t> viterbi_decode(
    const std::vector<std::array<double, 2>>& metrics, const CodeConfig& cfg,
    std::size_t info_len) {
  if (metrics.size() != coded_length(cfg, info_len))
    throw std::invalid_argument("viterbi_decode: metric count mismatch");

  const Trellis tr = Trellis::build(cfg);
  const std::size_t steps = info_len + cfg.memory();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> pm(tr.states, kInf), pm_next(tr.states, kInf);
  pm[0] = 0.0;
  // survivor[t][state] = predecessor state at time t-1 (state reached at t).
  std::vector<std::vector<int>> survivor(steps + 1,
                                         std::vector<int>(tr.states, -1));

  // Challenger path (pred = a) is lexicographically smaller than incumbent
  // (pred = b) into the same state at time t+1: walk both chains back to the
  // merge point and compare the earliest differing decision bits.
  auto lex_smaller = [&](int a, int b, std::size_t t) {
    int sa = a, sb = b;
    int ba = -1, bb = -1;
    std::size_t tau = t;
    while (sa != sb && tau >= 1) {
      ba = sa & 1;
      bb = sb & 1;
      sa = survivor[tau][sa];
      sb = survivor[tau][sb];
      --tau;
    }
    return ba < bb;
  };

  std::size_t metric_idx = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    // Metric indices for the outputs kept at this step.
    std::array<long long, 8> kept_idx;
    kept_idx.fill(-1);
    for (int j = 0; j < tr.outputs; ++j)
      if (cfg.kept(static_cast<long long>(t), j))
        kept_idx[j] = static_cast<long long>(metric_idx++);

    std::fill(pm_next.begin(), pm_next.end(), kInf);
    const int max_input = t < info_len ? 2 : 1;  // tail forces zeros
    for (int s = 0; s < tr.states; ++s) {
      if (pm[s] == kInf) continue;
      for (int input = 0; input < max_input; ++input) {
        const int ns = tr.next_state[s * 2 + input];
        const std::uint32_t bits = tr.out_bits[s * 2 + input];
        double bm = 0.0;
        for (int j = 0; j < tr.outputs; ++j)
          if (kept_idx[j] >= 0) bm += metrics[kept_idx[j]][(bits >> j) & 1];
        const double cand = pm[s] + bm;
        if (cand < pm_next[ns]) {
          pm_next[ns] = cand;
          survivor[t + 1][ns] = s;
        } else if (cand == pm_next[ns] && survivor[t + 1][ns] >= 0 &&
                   lex_smaller(s, survivor[t + 1][ns], t)) {
          survivor[t + 1][ns] = s;
        }
      }
    }
    pm.swap(pm_next);
  }

  if (pm[0] == kInf)
    throw std::runtime_error("viterbi_decode: terminated path unreachable");

  std::vector<std::uint8_t> decisions(steps);
  int state = 0;
  for (std::size_t t = steps; t > 0; --t) {
    decisions[t - 1] = static_cast<std::uint8_t>(state & 1);
    state = survivor[t][state];
  }
  decisions.resize(info_len);
  return decisions;
}

}  // namespace cpmb
