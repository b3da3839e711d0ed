#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpmb/matrix.hpp"

namespace cpmb {

/// Square 2^m-QAM on the odd integer grid with reflected-Gray labels.
///
/// Label convention: an m-bit label b_0 b_1 ... b_{m-1} packs into an int
/// with b_0 as the most significant bit. The first m/2 bits select the real
/// level, the last m/2 bits the imaginary level; each half is the binary
/// reflected Gray code of the level index. Bit i of the symbol label thus
/// maps to bit i mod (m/2) of the real (i < m/2) or imaginary dimension.
struct Constellation {
  int bits_per_symbol = 0;   // m
  std::vector<cplx> points;  // indexed by packed label
  std::vector<double> omega; // one-dimension alphabet, ascending odd integers
  double energy_scale = 1.0; // multiply grid points by this for unit energy

  int size() const { return static_cast<int>(points.size()); }
  int half_bits() const { return bits_per_symbol / 2; }
  int side() const { return 1 << half_bits(); }

  cplx point_of_label(int label) const { return points[label]; }
  int label_of_point(cplx p) const;  // throws if p is not a grid point

  cplx map_bits(std::span<const std::uint8_t> bits) const;
  std::vector<std::uint8_t> demap_point(cplx p) const;

  /// Gray label (half_bits wide) of a one-dimension value in omega.
  int dim_label(double value) const;
  /// Bit i_hat of the one-dimension label of value.
  int dim_label_bit(double value, int i_hat) const;
  /// Omega_b^i: one-dimension values whose label has bit i_hat equal to b.
  std::vector<double> omega_subset(int i_hat, int b) const;

  int label_bit(int label, int i) const {
    return (label >> (bits_per_symbol - 1 - i)) & 1;
  }
};

/// Builds the constellation for m in {2, 4, 6}.
Constellation build_constellation(int bits_per_symbol);

struct BitSubset {
  int bit_position = 0;
  int bit_value = 0;
  std::vector<int> labels;  // members, as packed labels
};

/// chi_b^i: the half of the constellation whose label bit i equals b.
BitSubset bit_subset(const Constellation& c, int i, int b);

}  // namespace cpmb
