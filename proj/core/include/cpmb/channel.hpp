#pragma once

#include <span>
#include <vector>

#include "cpmb/matrix.hpp"
#include "cpmb/precoding.hpp"
#include "cpmb/rng.hpp"

namespace cpmb {

/// One quasi-static channel draw with its beamforming factors.
struct ChannelRealization {
  ComplexMatrix h;             // rx x tx
  std::vector<double> lambdas; // top-S singular values, decreasing
  ComplexMatrix u_tilde;       // rx x S receive beamformer
  ComplexMatrix v_tilde;       // tx x S transmit beamformer
};

/// i.i.d. unit-variance complex Gaussian entries.
ComplexMatrix sample_channel(int rx_antennas, int tx_antennas, Rng& rng);

ChannelRealization beamform(const ComplexMatrix& h, int streams);

struct NoiseModel {
  double n0 = 0.0;  // noise variance per complex dimension

  static NoiseModel from_snr(double snr_linear, int tx_antennas) {
    return NoiseModel{static_cast<double>(tx_antennas) / snr_linear};
  }
  static NoiseModel from_snr_db(double snr_db, int tx_antennas) {
    return from_snr(std::pow(10.0, snr_db / 10.0), tx_antennas);
  }
};

/// Effective diagonalized link: y_s = lambda_{perm[s]} (Theta x)_s + n_s.
/// x is ordered [precoded block; pass-through block]; noise is circularly
/// symmetric with per-component variance n0 (exact map when n0 == 0).
std::vector<cplx> transmit(const ChannelRealization& cr,
                           const PrecoderConfig& precoder,
                           std::span<const cplx> x, const NoiseModel& noise,
                           Rng& rng);

}  // namespace cpmb
