#include "cpmb/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace cpmb {

namespace {

int gray_encode(int x) { return x ^ (x >> 1); }

// Level index (0..side-1) of a one-dimension grid value, or -1.
int level_of(double v, int side) {
  const double lv = (v + (side - 1)) / 2.0;
  const int k = static_cast<int>(std::lround(lv));
  if (k < 0 || k >= side || std::abs(lv - k) > 1e-9) return -1;
  return k;
}

}  // namespace

Constellation build_constellation(int bits_per_symbol) {
  if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6)
    throw std::invalid_argument("build_constellation: m must be 2, 4, or 6");

  Constellation c;
  c.bits_per_symbol = bits_per_symbol;
  const int w = c.half_bits();
  const int side = 1 << w;

  c.omega.resize(side);
  for (int k = 0; k < side; ++k) c.omega[k] = 2.0 * k - (side - 1);

  c.points.resize(1 << bits_per_symbol);
  double energy = 0.0;
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      const int label = (gray_encode(a) << w) | gray_encode(b);
      const cplx p(c.omega[a], c.omega[b]);
      c.points[label] = p;
      energy += std::norm(p);
    }
  }
  energy /= static_cast<double>(c.points.size());
  c.energy_scale = 1.0 / std::sqrt(energy);
  return c;
}

int Constellation::label_of_point(cplx p) const {
  const int a = level_of(p.real(), side());
  const int b = level_of(p.imag(), side());
  if (a < 0 || b < 0)
    throw std::invalid_argument("demap: value is not a constellation point");
  return (gray_encode(a) << half_bits()) | gray_encode(b);
}

cplx Constellation::map_bits(std::span<const std::uint8_t> bits) const {
  if (static_cast<int>(bits.size()) != bits_per_symbol)
    throw std::invalid_argument("map_bits: wrong bit count");
  int label = 0;
  for (int i = 0; i < bits_per_symbol; ++i)
    label = (label << 1) | (bits[i] & 1);
  return points[label];
}

std::vector<std::uint8_t> Constellation::demap_point(cplx p) const {
  const int label = label_of_point(p);
  std::vector<std::uint8_t> bits(bits_per_symbol);
  for (int i = 0; i < bits_per_symbol; ++i)
    bits[i] = static_cast<std::uint8_t>(label_bit(label, i));
  return bits;
}

int Constellation::dim_label(double value) const {
  const int k = level_of(value, side());
  if (k < 0) throw std::invalid_argument("dim_label: not an alphabet value");
  return gray_encode(k);
}

int Constellation::dim_label_bit(double value, int i_hat) const {
  if (i_hat < 0 || i_hat >= half_bits())
    throw std::invalid_argument("dim_label_bit: bit position out of range");
  return (dim_label(value) >> (half_bits() - 1 - i_hat)) & 1;
}

std::vector<double> Constellation::omega_subset(int i_hat, int b) const {
  std::vector<double> out;
  out.reserve(omega.size() / 2);
  for (double v : omega)
    if (dim_label_bit(v, i_hat) == (b & 1)) out.push_back(v);
  return out;
}

BitSubset bit_subset(const Constellation& c, int i, int b) {
  if (i < 0 || i >= c.bits_per_symbol)
    throw std::invalid_argument("bit_subset: bit position out of range");
  BitSubset s;
  s.bit_position = i;
  s.bit_value = b & 1;
  for (int label = 0; label < c.size(); ++label)
    if (c.label_bit(label, i) == s.bit_value) s.labels.push_back(label);
  return s;
}

}  // namespace cpmb
