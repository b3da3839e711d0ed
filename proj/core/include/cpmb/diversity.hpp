#pragma once

#include <vector>

#include "cpmb/fec.hpp"

namespace cpmb {

/// Worst-case first-nonzero index over all pairwise errors of an uncoded
/// partially precoded system: max(eta_1, omega_{S-P}). Returns 1 for full
/// precoding (empty omega). Indices are 1-based.
int delta_max_uncoded_pp(const std::vector<int>& eta,
                         const std::vector<int>& omega);

/// (N - delta + 1)(M - delta + 1); requires 1 <= delta <= min(N, M).
long long diversity_order(int n_tx, int m_rx, int delta);

/// Per-stream counts of erroneous coded bits for one error event.
struct AlphaVector {
  std::vector<int> alpha;       // length S
  int hamming_weight = 0;       // sum of alpha
  long long multiplicity = 0;   // (event, start phase) pairs with this alpha
};

struct TransferFunction {
  int streams = 0;
  int weight_cap = 0;
  int start_phases = 0;  // distinct interleaver start states enumerated
  std::vector<AlphaVector> terms;  // sorted by (weight, alpha)
};

/// Enumerates every error event (trellis path leaving and re-entering the
/// zero state) of post-puncturing weight <= weight_cap, from every distinct
/// interleaver/puncture starting phase, tallying which stream each erroneous
/// transmitted bit lands on. Terms with identical alpha merge with summed
/// multiplicity.
TransferFunction enumerate_alpha_vectors(const CodeConfig& code,
                                         const InterleaverSpec& interleaver,
                                         int streams, int weight_cap);

struct DeltaResult {
  int delta = 0;
  long long order = 0;
  AlphaVector worst;  // an alpha vector attaining delta (empty if P == S)
};

/// delta rules for coded partially precoded systems. For each alpha vector:
/// d_H on the precoded streams zero => delta is the smallest omega stream in
/// use; otherwise min(eta_1, that stream) when it exists, else eta_1. The
/// system delta is the maximum over terms. Full precoding gives delta = 1,
/// which presumes the rotation passed verify_full_diversity.
DeltaResult delta_bicmb_pp(const TransferFunction& tf,
                           const std::vector<int>& eta,
                           const std::vector<int>& omega, int n_tx, int m_rx);

/// (N - ceil(S Rc) + 1)(M - ceil(S Rc) + 1), the cap for coded multiple
/// beamforming without precoding.
long long max_achievable_bicmb(int n_tx, int m_rx, int streams, double rate);

/// One row of the analytical order table for uncoded partial precoding.
struct PartialOrderRow {
  int precoded = 0;
  std::vector<int> eta, omega;
  int eta_first = 0;
  int omega_last = 0;
  int delta_max = 0;
  long long order = 0;
};

/// All (P, eta) combinations with 2 <= P < S for an N x M, S-stream system.
std::vector<PartialOrderRow> partial_order_table(int n_tx, int m_rx,
                                                 int streams);

}  // namespace cpmb
