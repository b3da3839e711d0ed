#pragma once

#include <vector>

#include "cpmb/matrix.hpp"
#include "cpmb/modem.hpp"

namespace cpmb {

/// Block precoder: the first `precoded` entries of the symbol vector pass
/// through the P x P rotation theta_tilde, the rest are untouched. Subchannel
/// indices (eta, omega, perm entries) are 1-based throughout, matching how
/// singular values are numbered.
struct PrecoderConfig {
  int streams = 0;   // S
  int precoded = 0;  // P
  std::vector<int> eta;    // subchannels carrying precoded symbols, increasing
  std::vector<int> omega;  // subchannels carrying pass-through symbols
  ComplexMatrix theta_tilde;  // P x P unitary rotation
  ComplexMatrix theta;        // S x S blockdiag(theta_tilde, I)
  std::vector<int> perm;      // perm[s] = subchannel carrying position s
};

/// The algebraic rotation used for the built-in family: row q of the matrix
/// is [1, t_q, t_q^2, ...] / sqrt(P) with t_q = exp(j (4q-3) pi / (2P)).
/// Defined for P in {1, 2, 4}.
ComplexMatrix vandermonde_rotation(int precoded);

PrecoderConfig build_precoder(int streams, int precoded, std::vector<int> eta,
                              std::vector<int> omega);

/// Convenience overload: omega is the complement of eta in {1..S}.
PrecoderConfig build_precoder(int streams, int precoded, std::vector<int> eta);

struct DiversityCertificate {
  double min_d1_sq = 0.0;  // smallest |theta_1^T (x - x')|^2 over distinct pairs
  bool passes = false;
  std::vector<cplx> argmin_diff;  // a difference vector attaining the minimum
};

/// Exhaustively checks that the first row of theta_tilde maps every nonzero
/// symbol-difference vector away from zero. Guarded to |chi|^P <= 2^16; larger
/// products need sampled verification instead.
DiversityCertificate verify_full_diversity(const ComplexMatrix& theta_tilde,
                                           const Constellation& c);

}  // namespace cpmb
