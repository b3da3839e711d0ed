#include "cpmb/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpmb {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_partition(int streams, int precoded, const std::vector<int>& eta,
                     const std::vector<int>& omega) {
  if (precoded < 1 || precoded > streams)
    throw std::invalid_argument("build_precoder: need 1 <= P <= S");
  if (static_cast<int>(eta.size()) != precoded ||
      static_cast<int>(omega.size()) != streams - precoded)
    throw std::invalid_argument("build_precoder: eta/omega sizes wrong");
  std::vector<bool> seen(streams + 1, false);
  auto take = [&](const std::vector<int>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 1 || v[i] > streams)
        throw std::invalid_argument("build_precoder: subchannel index out of range");
      if (seen[v[i]])
        throw std::invalid_argument("build_precoder: duplicate subchannel index");
      if (i > 0 && v[i] <= v[i - 1])
        throw std::invalid_argument("build_precoder: indices must increase");
      seen[v[i]] = true;
    }
  };
  take(eta);
  take(omega);
}

}  // namespace

ComplexMatrix vandermonde_rotation(int precoded) {
  if (precoded == 1) {
    ComplexMatrix t(1, 1);
    t(0, 0) = 1.0;
    return t;
  }
  if (precoded != 2 && precoded != 4)
    throw std::invalid_argument("vandermonde_rotation: P must be 1, 2, or 4");
  const int p = precoded;
  ComplexMatrix t(p, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (int q = 1; q <= p; ++q) {
    const double ang = (4.0 * q - 3.0) * kPi / (2.0 * p);
    const cplx root = std::polar(1.0, ang);
    cplx pow = 1.0;
    for (int col = 0; col < p; ++col) {
      t(q - 1, col) = scale * pow;
      pow *= root;
    }
  }
  return t;
}

PrecoderConfig build_precoder(int streams, int precoded, std::vector<int> eta,
                              std::vector<int> omega) {
  check_partition(streams, precoded, eta, omega);

  PrecoderConfig cfg;
  cfg.streams = streams;
  cfg.precoded = precoded;
  cfg.eta = std::move(eta);
  cfg.omega = std::move(omega);
  cfg.theta_tilde = vandermonde_rotation(precoded);

  cfg.theta = ComplexMatrix::identity(streams);
  for (int i = 0; i < precoded; ++i)
    for (int j = 0; j < precoded; ++j) cfg.theta(i, j) = cfg.theta_tilde(i, j);

  cfg.perm.resize(streams);
  for (int i = 0; i < precoded; ++i) cfg.perm[i] = cfg.eta[i];
  for (int i = 0; i < streams - precoded; ++i)
    cfg.perm[precoded + i] = cfg.omega[i];
  return cfg;
}

PrecoderConfig build_precoder(int streams, int precoded, std::vector<int> eta) {
  std::vector<bool> used(streams + 1, false);
  for (int e : eta) {
    if (e >= 1 && e <= streams) used[e] = true;
  }
  std::vector<int> omega;
  for (int s = 1; s <= streams; ++s)
    if (!used[s]) omega.push_back(s);
  return build_precoder(streams, precoded, std::move(eta), std::move(omega));
}

DiversityCertificate verify_full_diversity(const ComplexMatrix& theta_tilde,
                                           const Constellation& c) {
  const int p = static_cast<int>(theta_tilde.rows());
  if (theta_tilde.cols() != theta_tilde.rows())
    throw std::invalid_argument("verify_full_diversity: square rotation required");
  const int m = c.bits_per_symbol;
  if (p * m > 16)
    throw std::invalid_argument(
        "verify_full_diversity: |chi|^P exceeds 2^16; use sampled verification");

  // Enumerate per-coordinate symbol differences instead of raw pairs: the
  // first-row product depends only on x - x'.
  const int side = c.side();
  std::vector<cplx> diffs;
  for (int dr = -(side - 1); dr <= side - 1; ++dr)
    for (int di = -(side - 1); di <= side - 1; ++di)
      diffs.emplace_back(2.0 * dr, 2.0 * di);
  const int nd = static_cast<int>(diffs.size());

  DiversityCertificate cert;
  cert.min_d1_sq = std::numeric_limits<double>::infinity();
  std::vector<int> idx(p, 0);
  std::vector<cplx> d(p);
  while (true) {
    bool all_zero = true;
    for (int i = 0; i < p; ++i) {
      d[i] = diffs[idx[i]];
      if (d[i] != cplx{0.0, 0.0}) all_zero = false;
    }
    if (!all_zero) {
      cplx acc = 0.0;
      for (int i = 0; i < p; ++i) acc += theta_tilde(0, i) * d[i];
      const double val = std::norm(acc);
      if (val < cert.min_d1_sq) {
        cert.min_d1_sq = val;
        cert.argmin_diff = d;
      }
    }
    int pos = p - 1;
    while (pos >= 0 && ++idx[pos] == nd) idx[pos--] = 0;
    if (pos < 0) break;
  }
  cert.passes = cert.min_d1_sq > 1e-9;
  return cert;
}

}  // namespace cpmb
