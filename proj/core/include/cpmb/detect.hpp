#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cpmb/channel.hpp"
#include "cpmb/matrix.hpp"
#include "cpmb/modem.hpp"
#include "cpmb/precoding.hpp"

namespace cpmb {

/// Running tally of real multiplications, split by where they are spent.
/// QR/SVD setup and received-vector rotation are amortized per channel
/// realization and deliberately not tallied.
struct OpCounter {
  long long node_weight = 0;
  long long table_build = 0;
  long long radius_init = 0;

  long long total() const { return node_weight + table_build + radius_init; }
  OpCounter& operator+=(const OpCounter& o) {
    node_weight += o.node_weight;
    table_build += o.table_build;
    radius_init += o.radius_init;
    return *this;
  }
};

enum class LatticeLayout { conventional, interleaved };

/// Real-valued triangular system the tree searches operate on. The
/// interleaved layout alternates Re/Im per symbol and guarantees
/// R(u, u+1) == 0 for even 0-based u; those entries are snapped to exact
/// zero and excluded from the structural nonzero mask.
struct LatticeSystem {
  LatticeLayout layout = LatticeLayout::conventional;
  int dim = 0;  // 2P
  RealMatrix r;
  RealMatrix q;
  std::vector<std::uint8_t> nonzero;  // dim*dim structural mask
  int n_nonzero = 0;                  // N_R
  std::vector<double> omega;
  std::vector<double> y_rot;  // Q^T applied to the stacked received vector

  bool mask(int u, int v) const { return nonzero[u * dim + v] != 0; }
};

/// Stacks [Re; Im] blocks (conventional) and runs QR. y may be empty; use
/// rotate_received later for per-symbol updates.
LatticeSystem realify_conventional(const ComplexMatrix& f,
                                   std::span<const cplx> y,
                                   const std::vector<double>& omega);
/// Interleaved Re/Im layout with the structural zero pattern.
LatticeSystem realify_interleaved(const ComplexMatrix& f,
                                  std::span<const cplx> y,
                                  const std::vector<double>& omega);

std::vector<double> rotate_received(const LatticeSystem& ls,
                                    std::span<const cplx> y);
std::vector<cplx> to_complex(const LatticeSystem& ls,
                             std::span<const double> xbar);

/// Cached products R(u,v) * s for structurally nonzero entries and the
/// negative half of the alphabet; positive values come back negated.
class PrecalcTable {
 public:
  PrecalcTable() = default;

  long long size() const { return static_cast<long long>(products_.size()); }
  long long build_mults() const { return size(); }

  double lookup(int u, int v, double s) const {
    const int rank = rank_[u * dim_ + v];
    if (s < 0.0) return products_[rank * half_ + neg_index(s)];
    return -products_[rank * half_ + neg_index(-s)];
  }

  friend PrecalcTable build_table(const LatticeSystem& ls);

 private:
  int neg_index(double s) const {
    return static_cast<int>((s + side_ - 1) / 2.0 + 0.5);
  }

  int dim_ = 0;
  int half_ = 0;
  int side_ = 0;
  std::vector<int> rank_;
  std::vector<double> products_;
};

PrecalcTable build_table(const LatticeSystem& ls);

struct DetectionOutcome {
  std::vector<double> solution;  // lattice coordinates in the system's layout
  double weight = 0.0;
  long long mult_count = 0;
  long long nodes_visited = 0;  // weight evaluations performed
  OpCounter ops;
  std::vector<long long> evals_per_layer;
  double runner_up_weight = 0.0;  // exhaustive search only; inf if none
};

struct SearchResult {
  bool found = false;  // false => empty sphere, caller restarts
  DetectionOutcome outcome;
};

/// Restricts one lattice coordinate to a subset of the alphabet.
struct ConstraintSpec {
  int coord = 0;
  std::vector<double> allowed;
};

/// Depth-first Schnorr-Euchner search, node weight evaluated from the full
/// triangular row: dim - u + 1 multiplications per evaluation at 0-based
/// layer u. Radius shrinks to each new leaf weight.
SearchResult csd_search(const LatticeSystem& ls, double rho_sq,
                        const std::optional<ConstraintSpec>& constraint = {});

/// Same tree and enumeration order as csd_search, but node weights cost one
/// multiplication via the table, and children partial weights at even
/// 0-based layers are computed once per grandparent and recycled across
/// that grandparent's parents.
SearchResult psd_search(const LatticeSystem& ls, const PrecalcTable& table,
                        double rho_sq,
                        const std::optional<ConstraintSpec>& constraint = {});

struct ZfdfeResult {
  std::vector<double> estimate;
  double rho_sq = 0.0;
};

/// Successive back-substitution slicing; the radius is the residual of the
/// sliced estimate, so a subsequent search with the same constraint cannot
/// come up empty. Pass the table to make products free, as the proposed
/// decoder does.
ZfdfeResult zfdfe_radius(const LatticeSystem& ls, const PrecalcTable* table,
                         const std::optional<ConstraintSpec>& constraint,
                         OpCounter& ops);

/// Brute-force ML over chi^S for y = diag(gamma) * theta * x + n, with x on
/// the unscaled grid (fold any symbol scaling into gamma). Guarded to
/// |chi|^S <= 2^24. Candidate cost: 4 S^2 + 2 S real multiplications.
DetectionOutcome exhaustive_ml(std::span<const cplx> y,
                               std::span<const double> gamma,
                               const ComplexMatrix& theta,
                               const Constellation& c, int dim_s);
/// Same, with coordinate `coord` restricted to the given labels.
DetectionOutcome exhaustive_ml_constrained(std::span<const cplx> y,
                                           std::span<const double> gamma,
                                           const ComplexMatrix& theta,
                                           const Constellation& c, int dim_s,
                                           int coord,
                                           const std::vector<int>& labels);

struct ScalarDecision {
  cplx symbol;  // grid point
  int label = 0;
  double metric = 0.0;
  long long mults = 0;
};

/// Per-symbol slicing min_x |r - lambda x|^2 over the whole constellation.
ScalarDecision scalar_slice(cplx r, double lambda_scaled,
                            const Constellation& c);
/// Scalar ML bit metric over chi_b^i.
ScalarDecision scalar_bit_metric(cplx r, double lambda_scaled,
                                 const Constellation& c, int i, int b);

enum class Detector { exh, csd, psd };

/// Per-burst detector for the precoded block: owns the factorized lattice
/// basis and (for psd) the precalculation table, both amortized over the
/// burst. In coded mode csd/psd share the interleaved lattice and take their
/// initial radius from the constrained ZF-DFE estimate.
class PrecodedDetector {
 public:
  PrecodedDetector(Detector kind, std::vector<double> lambdas_eta, double scale,
                   const ComplexMatrix& theta_tilde, const Constellation& c,
                   bool coded_mode);

  struct Decision {
    std::vector<cplx> symbols;  // grid points, effective order
    double weight = 0.0;
    long long mults = 0;
    long long nodes = 0;
    int restarts = 0;
    OpCounter ops;
  };
  /// Uncoded detection; search detectors start from initial_radius_sq and
  /// double it after an empty sphere.
  Decision detect(std::span<const cplx> y_p, double initial_radius_sq);

  void set_received(std::span<const cplx> y_p);

  struct MetricResult {
    double value = 0.0;
    long long mults = 0;
    long long nodes = 0;
    int restarts = 0;
    OpCounter ops;
  };
  /// ML bit metric for label bit i (value b) of the precoded symbol at
  /// effective position l, using the vector loaded by set_received.
  MetricResult bit_metric(int l, int i, int b);

  long long table_build_mults() const {
    return table_ ? table_->build_mults() : 0;
  }
  const LatticeSystem& lattice() const { return basis_; }
  int precoded() const { return precoded_; }

 private:
  Detector kind_;
  bool coded_ = false;
  int precoded_ = 0;
  Constellation c_;
  std::vector<double> gamma_scaled_;
  ComplexMatrix theta_tilde_;
  LatticeSystem basis_;
  std::optional<PrecalcTable> table_;
  std::vector<cplx> y_cached_;
};

struct UncodedResult {
  std::vector<cplx> symbols;  // grid decisions, effective order
  long long mults = 0;
  long long nodes = 0;
  int restarts = 0;
  long long table_mults = 0;
};

/// Precoded block via the chosen detector with initial radius 2 N0 P,
/// pass-through coordinates via scalar slicing.
UncodedResult detect_uncoded(std::span<const cplx> y,
                             const ChannelRealization& cr,
                             const PrecoderConfig& pre, const Constellation& c,
                             const NoiseModel& noise, Detector det);

}  // namespace cpmb
