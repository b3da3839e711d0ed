#include "cpmb/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cpmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LatticeSystem finish_lattice(LatticeLayout layout, RealMatrix g,
                             std::span<const cplx> y,
                             const std::vector<double>& omega) {
  LatticeSystem ls;
  ls.layout = layout;
  ls.dim = static_cast<int>(g.rows());
  ls.omega = omega;

  Qr f = qr(g);
  ls.q = std::move(f.q);
  ls.r = std::move(f.r);

  double max_abs = 0.0;
  for (int u = 0; u < ls.dim; ++u)
    for (int v = u; v < ls.dim; ++v)
      max_abs = std::max(max_abs, std::abs(ls.r(u, v)));
  const double tol = 1e-10 * std::max(1.0, max_abs);

  ls.nonzero.assign(ls.dim * ls.dim, 0);
  ls.n_nonzero = 0;
  for (int u = 0; u < ls.dim; ++u) {
    for (int v = u; v < ls.dim; ++v) {
      bool structural = true;
      if (layout == LatticeLayout::interleaved && u % 2 == 0 && v == u + 1) {
        if (std::abs(ls.r(u, v)) > tol)
          throw NumericError("realify_interleaved: expected zero pattern missing");
        ls.r(u, v) = 0.0;
        structural = false;
      }
      if (structural) {
        ls.nonzero[u * ls.dim + v] = 1;
        ++ls.n_nonzero;
      }
    }
  }

  if (!y.empty()) ls.y_rot = rotate_received(ls, y);
  return ls;
}

}  // namespace

LatticeSystem realify_conventional(const ComplexMatrix& f,
                                   std::span<const cplx> y,
                                   const std::vector<double>& omega) {
  if (f.rows() != f.cols())
    throw std::invalid_argument("realify_conventional: square F required");
  const int p = static_cast<int>(f.rows());
  RealMatrix g(2 * p, 2 * p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      g(i, j) = f(i, j).real();
      g(i, p + j) = -f(i, j).imag();
      g(p + i, j) = f(i, j).imag();
      g(p + i, p + j) = f(i, j).real();
    }
  }
  return finish_lattice(LatticeLayout::conventional, std::move(g), y, omega);
}

LatticeSystem realify_interleaved(const ComplexMatrix& f,
                                  std::span<const cplx> y,
                                  const std::vector<double>& omega) {
  if (f.rows() != f.cols())
    throw std::invalid_argument("realify_interleaved: square F required");
  const int p = static_cast<int>(f.rows());
  RealMatrix g(2 * p, 2 * p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      g(2 * i, 2 * j) = f(i, j).real();
      g(2 * i, 2 * j + 1) = -f(i, j).imag();
      g(2 * i + 1, 2 * j) = f(i, j).imag();
      g(2 * i + 1, 2 * j + 1) = f(i, j).real();
    }
  }
  return finish_lattice(LatticeLayout::interleaved, std::move(g), y, omega);
}

std::vector<double> rotate_received(const LatticeSystem& ls,
                                    std::span<const cplx> y) {
  const int p = ls.dim / 2;
  if (static_cast<int>(y.size()) != p)
    throw std::invalid_argument("rotate_received: dimension mismatch");
  std::vector<double> stacked(ls.dim);
  if (ls.layout == LatticeLayout::conventional) {
    for (int i = 0; i < p; ++i) {
      stacked[i] = y[i].real();
      stacked[p + i] = y[i].imag();
    }
  } else {
    for (int i = 0; i < p; ++i) {
      stacked[2 * i] = y[i].real();
      stacked[2 * i + 1] = y[i].imag();
    }
  }
  std::vector<double> out(ls.dim, 0.0);
  for (int i = 0; i < ls.dim; ++i)
    for (int j = 0; j < ls.dim; ++j) out[i] += ls.q(j, i) * stacked[j];
  return out;
}

std::vector<cplx> to_complex(const LatticeSystem& ls,
                             std::span<const double> xbar) {
  const int p = ls.dim / 2;
  std::vector<cplx> x(p);
  if (ls.layout == LatticeLayout::conventional) {
    for (int i = 0; i < p; ++i) x[i] = cplx(xbar[i], xbar[p + i]);
  } else {
    for (int i = 0; i < p; ++i) x[i] = cplx(xbar[2 * i], xbar[2 * i + 1]);
  }
  return x;
}

PrecalcTable build_table(const LatticeSystem& ls) {
  PrecalcTable t;
  t.dim_ = ls.dim;
  t.side_ = static_cast<int>(ls.omega.size());
  t.half_ = t.side_ / 2;
  t.rank_.assign(ls.dim * ls.dim, -1);
  t.products_.reserve(static_cast<std::size_t>(ls.n_nonzero) * t.half_);
  int rank = 0;
  for (int u = 0; u < ls.dim; ++u) {
    for (int v = u; v < ls.dim; ++v) {
      if (!ls.mask(u, v)) continue;
      t.rank_[u * ls.dim + v] = rank++;
      for (int k = 0; k < t.half_; ++k)
        t.products_.push_back(ls.r(u, v) * ls.omega[k]);
    }
  }
  return t;
}

namespace {

// Residual of row u against the partial vector x (entries >= u valid):
// t = y_rot[u] - sum_{v >= u} R(u,v) x_v. With a table the products are
// lookups; otherwise the full row is multiplied out and *prod_count is
// advanced by dim - u.
double layer_residual(const LatticeSystem& ls, const PrecalcTable* table,
                      std::span<const double> x, int u,
                      long long* prod_count) {
  double t = ls.y_rot[u];
  if (table != nullptr) {
    for (int v = u; v < ls.dim; ++v)
      if (ls.mask(u, v)) t -= table->lookup(u, v, x[v]);
  } else {
    for (int v = u; v < ls.dim; ++v) t -= ls.r(u, v) * x[v];
    *prod_count += ls.dim - u;
  }
  return t;
}

class SphereEngine {
 public:
  SphereEngine(const LatticeSystem& ls, const PrecalcTable* table, bool recycle,
               const std::optional<ConstraintSpec>& constraint)
      : ls_(ls), table_(table), recycle_(recycle) {
    allowed_.assign(ls.dim, ls.omega);
    if (constraint) {
      if (constraint->coord < 0 || constraint->coord >= ls.dim)
        throw std::invalid_argument("sphere search: constraint coordinate out of range");
      if (constraint->allowed.empty())
        throw std::invalid_argument("sphere search: empty constraint set");
      allowed_[constraint->coord] = constraint->allowed;
    }
    x_.assign(ls.dim, 0.0);
    visit_id_.assign(ls.dim, 0);
    cache_.resize(ls.dim);
    scratch_.resize(ls.dim);
    for (int u = 0; u < ls.dim; ++u) {
      scratch_[u].resize(allowed_[u].size());
      order_.emplace_back(allowed_[u].size());
    }
    evals_per_layer_.assign(ls.dim, 0);
  }

  SearchResult run(double rho_sq) {
    radius_sq_ = rho_sq;
    found_ = false;
    best_w_ = kInf;
    expand(ls_.dim - 1, 0.0);

    SearchResult res;
    res.found = found_;
    res.outcome.solution = best_x_;
    res.outcome.weight = found_ ? best_w_ : kInf;
    res.outcome.ops = ops_;
    res.outcome.mult_count = ops_.total();
    res.outcome.nodes_visited = nodes_;
    res.outcome.evals_per_layer = evals_per_layer_;
    res.outcome.runner_up_weight = kInf;
    return res;
  }

 private:
  void expand(int u, double parent_total) {
    const std::vector<double>& cand = allowed_[u];
    std::vector<double>* pw = &scratch_[u];

    bool reuse = false;
    if (recycle_ && u % 2 == 0) {
      const long long gp = u + 2 < ls_.dim ? visit_id_[u + 2] : 0;
      if (cache_[u].gp_id == gp) {
        reuse = true;
        pw = &cache_[u].pw;
      } else {
        cache_[u].gp_id = gp;
        cache_[u].pw.resize(cand.size());
        pw = &cache_[u].pw;
      }
    }
    if (!reuse) {
      for (std::size_t k = 0; k < cand.size(); ++k) {
        x_[u] = cand[k];
        const double t =
            layer_residual(ls_, table_, x_, u, &ops_.node_weight);
        (*pw)[k] = t * t;
        ops_.node_weight += 1;  // the squaring
      }
      nodes_ += static_cast<long long>(cand.size());
      evals_per_layer_[u] += static_cast<long long>(cand.size());
    }

    std::vector<std::size_t>& order = order_[u];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (*pw)[a] != (*pw)[b] ? (*pw)[a] < (*pw)[b] : a < b;
    });

    for (std::size_t k : order) {
      const double total = parent_total + (*pw)[k];
      if (total > radius_sq_) break;  // Schnorr-Euchner order: the rest too
      x_[u] = cand[k];
      if (u == 0) {
        if (!found_ || total < best_w_) {
          found_ = true;
          best_w_ = total;
          best_x_ = x_;
          radius_sq_ = total;
        }
      } else {
        ++visit_id_[u];
        expand(u - 1, total);
      }
    }
  }

  const LatticeSystem& ls_;
  const PrecalcTable* table_;
  bool recycle_;
  std::vector<std::vector<double>> allowed_;
  std::vector<double> x_, best_x_;
  std::vector<std::vector<double>> scratch_;
  std::vector<std::vector<std::size_t>> order_;
  struct Cache {
    long long gp_id = -1;
    std::vector<double> pw;
  };
  std::vector<Cache> cache_;
  std::vector<long long> visit_id_;
  std::vector<long long> evals_per_layer_;
  OpCounter ops_;
  long long nodes_ = 0;
  double radius_sq_ = 0.0;
  double best_w_ = kInf;
  bool found_ = false;
};

}  // namespace

SearchResult csd_search(const LatticeSystem& ls, double rho_sq,
                        const std::optional<ConstraintSpec>& constraint) {
  if (rho_sq <= 0.0)
    throw std::invalid_argument("csd_search: radius must be positive");
  if (ls.y_rot.empty())
    throw std::invalid_argument("csd_search: no received vector loaded");
  return SphereEngine(ls, nullptr, false, constraint).run(rho_sq);
}

SearchResult psd_search(const LatticeSystem& ls, const PrecalcTable& table,
                        double rho_sq,
                        const std::optional<ConstraintSpec>& constraint) {
  if (ls.layout != LatticeLayout::interleaved)
    throw std::invalid_argument("psd_search: interleaved representation required");
  if (rho_sq <= 0.0)
    throw std::invalid_argument("psd_search: radius must be positive");
  if (ls.y_rot.empty())
    throw std::invalid_argument("psd_search: no received vector loaded");
  return SphereEngine(ls, &table, true, constraint).run(rho_sq);
}

ZfdfeResult zfdfe_radius(const LatticeSystem& ls, const PrecalcTable* table,
                         const std::optional<ConstraintSpec>& constraint,
                         OpCounter& ops) {
  if (ls.y_rot.empty())
    throw std::invalid_argument("zfdfe_radius: no received vector loaded");
  ZfdfeResult res;
  res.estimate.assign(ls.dim, 0.0);

  for (int u = ls.dim - 1; u >= 0; --u) {
    double acc = ls.y_rot[u];
    for (int v = u + 1; v < ls.dim; ++v) {
      if (table != nullptr) {
        if (ls.mask(u, v)) acc -= table->lookup(u, v, res.estimate[v]);
      } else {
        acc -= ls.r(u, v) * res.estimate[v];
        ops.radius_init += 1;
      }
    }
    const std::vector<double>* cand = &ls.omega;
    if (constraint && constraint->coord == u) cand = &constraint->allowed;
    double best = kInf;
    double pick = (*cand)[0];
    for (double s : *cand) {
      double prod;
      if (table != nullptr) {
        prod = table->lookup(u, u, s);
      } else {
        prod = ls.r(u, u) * s;
        ops.radius_init += 1;
      }
      const double d = std::abs(acc - prod);
      if (d < best) {
        best = d;
        pick = s;
      }
    }
    res.estimate[u] = pick;
  }

  // Residual recomputed with the searches' per-layer expression and their
  // top-down summation order, so the estimate itself is never pruned at this
  // radius.
  double rho = 0.0;
  for (int u = ls.dim - 1; u >= 0; --u) {
    const double t = layer_residual(ls, table, res.estimate, u, &ops.radius_init);
    rho += t * t;
    ops.radius_init += 1;
  }
  res.rho_sq = rho;
  return res;
}

namespace {

DetectionOutcome exhaustive_core(std::span<const cplx> y,
                                 std::span<const double> gamma,
                                 const ComplexMatrix& theta,
                                 const Constellation& c, int dim_s,
                                 const std::vector<std::vector<int>>& labels) {
  if (static_cast<int>(y.size()) != dim_s ||
      static_cast<int>(gamma.size()) != dim_s ||
      static_cast<int>(theta.rows()) != dim_s)
    throw std::invalid_argument("exhaustive_ml: dimension mismatch");
  double count = 1.0;
  for (const auto& l : labels) count *= static_cast<double>(l.size());
  if (count > static_cast<double>(1 << 24))
    throw std::invalid_argument("exhaustive_ml: candidate space exceeds 2^24");

  ComplexMatrix f(dim_s, dim_s);
  for (int i = 0; i < dim_s; ++i)
    for (int j = 0; j < dim_s; ++j) f(i, j) = gamma[i] * theta(i, j);

  DetectionOutcome out;
  out.weight = kInf;
  out.runner_up_weight = kInf;

  std::vector<int> idx(dim_s, 0);
  std::vector<cplx> x(dim_s);
  while (true) {
    for (int i = 0; i < dim_s; ++i) x[i] = c.points[labels[i][idx[i]]];
    double w = 0.0;
    for (int i = 0; i < dim_s; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < dim_s; ++j) acc += f(i, j) * x[j];
      out.ops.node_weight += 4 * dim_s;
      const cplx res = y[i] - acc;
      w += res.real() * res.real() + res.imag() * res.imag();
      out.ops.node_weight += 2;
    }
    ++out.nodes_visited;
    if (w < out.weight) {
      out.runner_up_weight = out.weight;
      out.weight = w;
      out.solution.resize(2 * dim_s);
      for (int i = 0; i < dim_s; ++i) {
        out.solution[2 * i] = x[i].real();
        out.solution[2 * i + 1] = x[i].imag();
      }
    } else if (w < out.runner_up_weight) {
      out.runner_up_weight = w;
    }
    int pos = dim_s - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(labels[pos].size()))
      idx[pos--] = 0;
    if (pos < 0) break;
  }
  out.mult_count = out.ops.total();
  return out;
}

}  // namespace

DetectionOutcome exhaustive_ml(std::span<const cplx> y,
                               std::span<const double> gamma,
                               const ComplexMatrix& theta,
                               const Constellation& c, int dim_s) {
  std::vector<int> all(c.size());
  std::iota(all.begin(), all.end(), 0);
  return exhaustive_core(y, gamma, theta, c, dim_s,
                         std::vector<std::vector<int>>(dim_s, all));
}

DetectionOutcome exhaustive_ml_constrained(std::span<const cplx> y,
                                           std::span<const double> gamma,
                                           const ComplexMatrix& theta,
                                           const Constellation& c, int dim_s,
                                           int coord,
                                           const std::vector<int>& labels) {
  if (coord < 0 || coord >= dim_s)
    throw std::invalid_argument("exhaustive_ml_constrained: bad coordinate");
  std::vector<int> all(c.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<int>> per(dim_s, all);
  per[coord] = labels;
  return exhaustive_core(y, gamma, theta, c, dim_s, per);
}

namespace {

ScalarDecision scalar_scan(cplx r, double lambda_scaled, const Constellation& c,
                           const std::vector<int>& labels) {
  ScalarDecision d;
  d.metric = kInf;
  for (int label : labels) {
    const cplx p = c.points[label];
    const double re = r.real() - lambda_scaled * p.real();
    const double im = r.imag() - lambda_scaled * p.imag();
    const double w = re * re + im * im;
    d.mults += 4;
    if (w < d.metric) {
      d.metric = w;
      d.label = label;
      d.symbol = p;
    }
  }
  return d;
}

}  // namespace

ScalarDecision scalar_slice(cplx r, double lambda_scaled,
                            const Constellation& c) {
  std::vector<int> all(c.size());
  std::iota(all.begin(), all.end(), 0);
  return scalar_scan(r, lambda_scaled, c, all);
}

ScalarDecision scalar_bit_metric(cplx r, double lambda_scaled,
                                 const Constellation& c, int i, int b) {
  return scalar_scan(r, lambda_scaled, c, bit_subset(c, i, b).labels);
}

PrecodedDetector::PrecodedDetector(Detector kind,
                                   std::vector<double> lambdas_eta,
                                   double scale,
                                   const ComplexMatrix& theta_tilde,
                                   const Constellation& c, bool coded_mode)
    : kind_(kind),
      coded_(coded_mode),
      precoded_(static_cast<int>(lambdas_eta.size())),
      c_(c),
      theta_tilde_(theta_tilde) {
  gamma_scaled_.resize(precoded_);
  for (int i = 0; i < precoded_; ++i)
    gamma_scaled_[i] = scale * lambdas_eta[i];

  if (kind_ == Detector::exh) return;

  ComplexMatrix f(precoded_, precoded_);
  for (int i = 0; i < precoded_; ++i)
    for (int j = 0; j < precoded_; ++j)
      f(i, j) = gamma_scaled_[i] * theta_tilde(i, j);

  const bool interleaved = kind_ == Detector::psd || coded_;
  basis_ = interleaved ? realify_interleaved(f, {}, c.omega)
                       : realify_conventional(f, {}, c.omega);
  if (kind_ == Detector::psd) table_ = build_table(basis_);
}

void PrecodedDetector::set_received(std::span<const cplx> y_p) {
  y_cached_.assign(y_p.begin(), y_p.end());
  if (kind_ != Detector::exh) basis_.y_rot = rotate_received(basis_, y_p);
}

PrecodedDetector::Decision PrecodedDetector::detect(std::span<const cplx> y_p,
                                                    double initial_radius_sq) {
  Decision d;
  if (kind_ == Detector::exh) {
    DetectionOutcome out =
        exhaustive_ml(y_p, gamma_scaled_, theta_tilde_, c_, precoded_);
    LatticeSystem tmp;
    tmp.layout = LatticeLayout::interleaved;
    tmp.dim = 2 * precoded_;
    d.symbols = to_complex(tmp, out.solution);
    d.weight = out.weight;
    d.ops = out.ops;
    d.mults = out.mult_count;
    d.nodes = out.nodes_visited;
    return d;
  }

  set_received(y_p);
  double radius = initial_radius_sq;
  while (true) {
    SearchResult res = kind_ == Detector::psd
                           ? psd_search(basis_, *table_, radius)
                           : csd_search(basis_, radius);
    d.ops += res.outcome.ops;
    d.nodes += res.outcome.nodes_visited;
    if (res.found) {
      d.symbols = to_complex(basis_, res.outcome.solution);
      d.weight = res.outcome.weight;
      break;
    }
    ++d.restarts;
    radius *= 2.0;
  }
  d.mults = d.ops.total();
  return d;
}

PrecodedDetector::MetricResult PrecodedDetector::bit_metric(int l, int i,
                                                            int b) {
  if (l < 0 || l >= precoded_ || i < 0 || i >= c_.bits_per_symbol)
    throw std::invalid_argument("bit_metric: location out of range");
  MetricResult m;
  if (kind_ == Detector::exh) {
    DetectionOutcome out = exhaustive_ml_constrained(
        y_cached_, gamma_scaled_, theta_tilde_, c_, precoded_, l,
        bit_subset(c_, i, b).labels);
    m.value = out.weight;
    m.ops = out.ops;
    m.mults = out.mult_count;
    m.nodes = out.nodes_visited;
    return m;
  }

  const int half = c_.half_bits();
  ConstraintSpec spec;
  spec.coord = 2 * l + (i < half ? 0 : 1);
  spec.allowed = c_.omega_subset(i % half, b);

  OpCounter radius_ops;
  const PrecalcTable* tbl = table_ ? &*table_ : nullptr;
  ZfdfeResult zf = zfdfe_radius(basis_, tbl, spec, radius_ops);
  m.ops += radius_ops;

  // An exactly-zero residual still needs a positive radius; the estimate's
  // weight of 0 stays inside it.
  double radius = std::max(zf.rho_sq, 1e-300);
  while (true) {
    SearchResult res = kind_ == Detector::psd
                           ? psd_search(basis_, *table_, radius, spec)
                           : csd_search(basis_, radius, spec);
    m.ops += res.outcome.ops;
    m.nodes += res.outcome.nodes_visited;
    if (res.found) {
      m.value = res.outcome.weight;
      break;
    }
    ++m.restarts;  // should not happen with the ZF-DFE radius
    radius = radius * 2.0 + 1e-12;
  }
  m.mults = m.ops.total();
  return m;
}

UncodedResult detect_uncoded(std::span<const cplx> y,
                             const ChannelRealization& cr,
                             const PrecoderConfig& pre, const Constellation& c,
                             const NoiseModel& noise, Detector det) {
  const int s = pre.streams;
  const int p = pre.precoded;
  if (static_cast<int>(y.size()) != s)
    throw std::invalid_argument("detect_uncoded: dimension mismatch");

  std::vector<double> lambdas_eta(p);
  for (int i = 0; i < p; ++i) lambdas_eta[i] = cr.lambdas[pre.eta[i] - 1];

  PrecodedDetector detector(det, lambdas_eta, c.energy_scale, pre.theta_tilde,
                            c, /*coded_mode=*/false);
  const double radius = std::max(2.0 * noise.n0 * p, 1e-300);
  PrecodedDetector::Decision dec =
      detector.detect(y.subspan(0, p), radius);

  UncodedResult out;
  out.symbols = dec.symbols;
  out.symbols.resize(s);
  out.mults = dec.mults;
  out.nodes = dec.nodes;
  out.restarts = dec.restarts;
  out.table_mults = detector.table_build_mults();

  for (int j = p; j < s; ++j) {
    const double lam = c.energy_scale * cr.lambdas[pre.omega[j - p] - 1];
    ScalarDecision sd = scalar_slice(y[j], lam, c);
    out.symbols[j] = sd.symbol;
    out.mults += sd.mults;
  }
  return out;
}

}  // namespace cpmb
