#include "cpmb/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace cpmb {

int delta_max_uncoded_pp(const std::vector<int>& eta,
                         const std::vector<int>& omega) {
  if (eta.empty()) throw std::invalid_argument("delta_max: eta must be nonempty");
  if (omega.empty()) return 1;  // full precoding
  return std::max(eta.front(), omega.back());
}

long long diversity_order(int n_tx, int m_rx, int delta) {
  if (delta < 1 || delta > std::min(n_tx, m_rx))
    throw std::invalid_argument("diversity_order: delta out of range");
  return static_cast<long long>(n_tx - delta + 1) *
         static_cast<long long>(m_rx - delta + 1);
}

namespace {

struct EventEnumerator {
  const Trellis& tr;
  const CodeConfig& code;
  const InterleaverSpec& il;
  int streams;
  int weight_cap;
  int punc_period;
  std::map<std::pair<int, std::vector<int>>, long long>& acc;  // (weight, alpha)

  std::vector<int> alpha;
  long long depth = 0;
  long long max_depth = 0;

  void run(int start_int_phase, int start_punc_phase) {
    alpha.assign(streams, 0);
    // an event starts with input 1 out of the zero state
    step(0, start_int_phase, start_punc_phase, 0, /*input=*/1);
  }

  void step(int state, int int_phase, int punc_phase, int weight, int input) {
    // A path longer than (cap+1) x |state space| must repeat a state at the
    // same weight, i.e. contains a zero-weight loop.
    if (++depth > max_depth)
      throw std::runtime_error(
          "enumerate_alpha_vectors: state-space guard tripped; lower the weight cap");
    const std::uint32_t bits = tr.out_bits[state * 2 + input];
    int w = weight;
    int phase = int_phase;
    std::vector<int> touched;
    for (int j = 0; j < tr.outputs; ++j) {
      if (!code.kept(punc_phase, j)) continue;
      if ((bits >> j) & 1) {
        ++w;
        ++alpha[il.stream_of(phase)];
        touched.push_back(il.stream_of(phase));
      }
      phase = (phase + 1) % il.period();
    }
    const int next = tr.next_state[state * 2 + input];
    const int next_punc = punc_period > 0 ? (punc_phase + 1) % punc_period : 0;
    if (w <= weight_cap) {
      if (next == 0) {
        ++acc[{w, alpha}];
      } else {
        step(next, phase, next_punc, w, 0);
        step(next, phase, next_punc, w, 1);
      }
    }
    for (int s : touched) --alpha[s];
    --depth;
  }
};

}  // namespace

TransferFunction enumerate_alpha_vectors(const CodeConfig& code,
                                         const InterleaverSpec& interleaver,
                                         int streams, int weight_cap) {
  if (streams != interleaver.streams)
    throw std::invalid_argument("enumerate_alpha_vectors: stream count mismatch");
  if (weight_cap < 1 || weight_cap > 16)
    throw std::invalid_argument("enumerate_alpha_vectors: weight cap out of range");

  const Trellis tr = Trellis::build(code);
  const int punc_period = code.puncture_period();

  // Distinct (interleaver phase, puncture phase) pairs seen at trellis step
  // boundaries along the transmitted stream.
  std::set<std::pair<int, int>> starts;
  {
    int phase = 0, punc = 0;
    do {
      starts.insert({phase, punc});
      for (int j = 0; j < tr.outputs; ++j)
        if (code.kept(punc, j)) phase = (phase + 1) % interleaver.period();
      punc = punc_period > 0 ? (punc + 1) % punc_period : 0;
    } while (!starts.count({phase, punc}));
  }

  std::map<std::pair<int, std::vector<int>>, long long> acc;
  EventEnumerator en{tr, code, interleaver, streams, weight_cap,
                     punc_period, acc, {}, 0, 0};
  en.max_depth = static_cast<long long>(weight_cap + 1) * tr.states *
                 interleaver.period() * std::max(1, punc_period);

  for (const auto& [phase, punc] : starts) {
    en.depth = 0;
    en.run(phase, punc);
  }

  TransferFunction tf;
  tf.streams = streams;
  tf.weight_cap = weight_cap;
  tf.start_phases = static_cast<int>(starts.size());
  for (const auto& [key, mult] : acc) {
    AlphaVector av;
    av.hamming_weight = key.first;
    av.alpha = key.second;
    av.multiplicity = mult;
    tf.terms.push_back(std::move(av));
  }
  return tf;
}

DeltaResult delta_bicmb_pp(const TransferFunction& tf,
                           const std::vector<int>& eta,
                           const std::vector<int>& omega, int n_tx, int m_rx) {
  DeltaResult res;
  if (omega.empty()) {
    res.delta = 1;
    res.order = diversity_order(n_tx, m_rx, 1);
    return res;
  }
  if (tf.terms.empty())
    throw std::invalid_argument("delta_bicmb_pp: empty transfer function");

  res.delta = 0;
  for (const AlphaVector& term : tf.terms) {
    int d_h_p = 0;
    for (int s : eta) d_h_p += term.alpha[s - 1];
    int delta_prime = 0;  // smallest omega stream carrying erroneous bits
    for (int s : omega) {
      if (term.alpha[s - 1] > 0) {
        delta_prime = s;
        break;
      }
    }
    int delta_term;
    if (d_h_p == 0) {
      delta_term = delta_prime;  // nonzero: the event must land somewhere
    } else {
      delta_term = delta_prime > 0 ? std::min(eta.front(), delta_prime)
                                   : eta.front();
    }
    if (delta_term > res.delta) {
      res.delta = delta_term;
      res.worst = term;
    }
  }
  res.order = diversity_order(n_tx, m_rx, res.delta);
  return res;
}

long long max_achievable_bicmb(int n_tx, int m_rx, int streams, double rate) {
  if (rate <= 0.0 || rate > 1.0)
    throw std::invalid_argument("max_achievable_bicmb: rate out of (0, 1]");
  const int q = static_cast<int>(std::ceil(streams * rate - 1e-9));
  if (q > std::min(n_tx, m_rx))
    throw std::invalid_argument("max_achievable_bicmb: ceil(S Rc) exceeds min(N, M)");
  return static_cast<long long>(n_tx - q + 1) * static_cast<long long>(m_rx - q + 1);
}

namespace {

void combinations(int streams, int choose, std::vector<int>& cur, int next,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == choose) {
    out.push_back(cur);
    return;
  }
  for (int s = next; s <= streams; ++s) {
    cur.push_back(s);
    combinations(streams, choose, cur, s + 1, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<PartialOrderRow> partial_order_table(int n_tx, int m_rx,
                                                 int streams) {
  std::vector<PartialOrderRow> rows;
  for (int p = 2; p < streams; ++p) {
    std::vector<std::vector<int>> etas;
    std::vector<int> cur;
    combinations(streams, p, cur, 1, etas);
    for (const auto& eta : etas) {
      PartialOrderRow row;
      row.precoded = p;
      row.eta = eta;
      std::vector<bool> used(streams + 1, false);
      for (int e : eta) used[e] = true;
      for (int s = 1; s <= streams; ++s)
        if (!used[s]) row.omega.push_back(s);
      row.eta_first = row.eta.front();
      row.omega_last = row.omega.back();
      row.delta_max = delta_max_uncoded_pp(row.eta, row.omega);
      row.order = diversity_order(n_tx, m_rx, row.delta_max);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace cpmb
