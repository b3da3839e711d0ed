#include "cpmb/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpmb {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagTol = 1e-14;

// Orthogonalizes columns p and q of w in place, applying the same rotation to
// v. Returns the relative off-diagonal magnitude before the rotation.
double jacobi_rotate(ComplexMatrix& w, ComplexMatrix& v, std::size_t p,
                     std::size_t q) {
  double app = 0.0, aqq = 0.0;
  cplx apq = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    app += std::norm(w(i, p));
    aqq += std::norm(w(i, q));
    apq += std::conj(w(i, p)) * w(i, q);
  }
  const double denom = std::sqrt(app * aqq);
  if (denom == 0.0) return 0.0;
  const double off = std::abs(apq) / denom;
  if (off <= kOffDiagTol) return off;

  const double g = std::abs(apq);
  const cplx phase = apq / g;  // apq = g * phase
  const double zeta = (aqq - app) / (2.0 * g);
  const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = c * t;

  for (std::size_t i = 0; i < w.rows(); ++i) {
    const cplx wp = w(i, p);
    const cplx wq = w(i, q) * std::conj(phase);
    w(i, p) = c * wp - s * wq;
    w(i, q) = s * wp + c * wq;
  }
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const cplx vp = v(i, p);
    const cplx vq = v(i, q) * std::conj(phase);
    v(i, p) = c * vp - s * vq;
    v(i, q) = s * vp + c * vq;
  }
  return off;
}

Svd svd_tall(const ComplexMatrix& a) {
  const std::size_t n = a.cols();
  ComplexMatrix w = a;
  ComplexMatrix v = ComplexMatrix::identity(n);

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        worst = std::max(worst, jacobi_rotate(w, v, p, q));
    converged = worst <= kOffDiagTol;
  }
  if (!converged) throw NumericError("svd: Jacobi sweeps did not converge");

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) s += std::norm(w(i, j));
    sigma[j] = std::sqrt(s);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  Svd out;
  out.u = ComplexMatrix(a.rows(), n);
  out.v = ComplexMatrix(n, n);
  out.sigma.resize(n);
  const double sig_max = sigma[order[0]];
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    if (sigma[src] > sig_max * 1e-13 && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < a.rows(); ++i)
        out.u(i, j) = w(i, src) / sigma[src];
    } else {
      // Null direction: complete the basis with a unit vector orthogonal to
      // the columns already placed.
      for (std::size_t e = 0; e < a.rows(); ++e) {
        std::vector<cplx> cand(a.rows(), 0.0);
        cand[e] = 1.0;
        for (std::size_t jj = 0; jj < j; ++jj) {
          cplx dot = 0.0;
          for (std::size_t i = 0; i < a.rows(); ++i)
            dot += std::conj(out.u(i, jj)) * cand[i];
          for (std::size_t i = 0; i < a.rows(); ++i)
            cand[i] -= dot * out.u(i, jj);
        }
        double nrm = 0.0;
        for (const cplx& cv : cand) nrm += std::norm(cv);
        nrm = std::sqrt(nrm);
        if (nrm > 0.5) {
          for (std::size_t i = 0; i < a.rows(); ++i) out.u(i, j) = cand[i] / nrm;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

Svd svd(const ComplexMatrix& a) {
  if (a.rows() >= a.cols()) return svd_tall(a);
  Svd t = svd_tall(conj_transpose(a));
  return Svd{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Qr qr(const RealMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("qr: square input required");
  const std::size_t n = a.rows();
  RealMatrix r = a;
  RealMatrix q = RealMatrix::identity(n);

  double max_abs = 0.0;
  for (double v : a.data()) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw NumericError("qr: zero matrix");

  std::vector<double> h(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double nrm = 0.0;
    for (std::size_t i = k; i < n; ++i) nrm += r(i, k) * r(i, k);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) continue;  // column already zero; rank check below
    const double alpha = r(k, k) >= 0.0 ? -nrm : nrm;
    for (std::size_t i = k; i < n; ++i) h[i] = r(i, k);
    h[k] -= alpha;
    double hh = 0.0;
    for (std::size_t i = k; i < n; ++i) hh += h[i] * h[i];
    if (hh == 0.0) continue;

    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += h[i] * r(i, j);
      const double f = 2.0 * dot / hh;
      for (std::size_t i = k; i < n; ++i) r(i, j) -= f * h[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += h[i] * q(i, j);
      const double f = 2.0 * dot / hh;
      for (std::size_t i = k; i < n; ++i) q(i, j) -= f * h[i];
    }
  }

  // q currently holds Q^T; flip signs so diag(R) >= 0, then transpose.
  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        r(i, j) = -r(i, j);
        q(i, j) = -q(i, j);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(r(i, i)) <= 1e-12 * max_abs)
      throw NumericError("qr: rank-deficient input");

  // Zero out the strictly lower part; it only holds rounding noise.
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) r(i, j) = 0.0;

  return Qr{q.transpose(), std::move(r)};
}

}  // namespace cpmb
