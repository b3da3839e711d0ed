#include "cpmb/channel.hpp"

#include <stdexcept>

namespace cpmb {

ComplexMatrix sample_channel(int rx_antennas, int tx_antennas, Rng& rng) {
  if (rx_antennas < 1 || tx_antennas < 1)
    throw std::invalid_argument("sample_channel: antenna counts must be >= 1");
  ComplexMatrix h(rx_antennas, tx_antennas);
  for (int i = 0; i < rx_antennas; ++i)
    for (int j = 0; j < tx_antennas; ++j)
      h(i, j) = rng.complex_gaussian(1.0);
  return h;
}

ChannelRealization beamform(const ComplexMatrix& h, int streams) {
  const int k = static_cast<int>(std::min(h.rows(), h.cols()));
  if (streams < 1 || streams > k)
    throw std::invalid_argument("beamform: S must satisfy 1 <= S <= min(M, N)");

  Svd f = svd(h);
  ChannelRealization cr;
  cr.h = h;
  cr.lambdas.assign(f.sigma.begin(), f.sigma.begin() + streams);
  cr.u_tilde = ComplexMatrix(h.rows(), streams);
  cr.v_tilde = ComplexMatrix(h.cols(), streams);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (int j = 0; j < streams; ++j) cr.u_tilde(i, j) = f.u(i, j);
  for (std::size_t i = 0; i < h.cols(); ++i)
    for (int j = 0; j < streams; ++j) cr.v_tilde(i, j) = f.v(i, j);
  return cr;
}

std::vector<cplx> transmit(const ChannelRealization& cr,
                           const PrecoderConfig& precoder,
                           std::span<const cplx> x, const NoiseModel& noise,
                           Rng& rng) {
  const int s = precoder.streams;
  if (static_cast<int>(x.size()) != s)
    throw std::invalid_argument("transmit: symbol vector dimension mismatch");
  if (static_cast<int>(cr.lambdas.size()) < s)
    throw std::invalid_argument("transmit: channel has fewer subchannels than S");

  std::vector<cplx> y(s, 0.0);
  for (int i = 0; i < s; ++i) {
    cplx acc = 0.0;
    for (int j = 0; j < s; ++j) acc += precoder.theta(i, j) * x[j];
    y[i] = cr.lambdas[precoder.perm[i] - 1] * acc;
    if (noise.n0 > 0.0) y[i] += rng.complex_gaussian(noise.n0);
  }
  return y;
}

}  // namespace cpmb
