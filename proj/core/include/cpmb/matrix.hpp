#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cpmb {

using cplx = std::complex<double>;

/// Raised when an iterative factorization fails to converge or the input is
/// numerically unusable (e.g. rank deficient where full rank is required).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Small dense row-major matrix. Everything in this project is at most a few
/// dozen entries, so no effort is spent on blocking or views.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T{}) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Mat: empty shape");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<T>& data() const { return data_; }

  Mat operator*(const Mat& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("Mat: shape mismatch");
    Mat out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const T a = (*this)(i, k);
        for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  std::vector<T> apply(const std::vector<T>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("Mat: vector mismatch");
    std::vector<T> y(rows_, T{});
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Mat transpose() const {
    Mat out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  double frobenius() const {
    double s = 0.0;
    for (const T& v : data_) s += std::norm(std::complex<double>(v));
    return std::sqrt(s);
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using ComplexMatrix = Mat<cplx>;
using RealMatrix = Mat<double>;

inline ComplexMatrix conj_transpose(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

struct Svd {
  ComplexMatrix u;            // rows(A) x k, orthonormal columns
  std::vector<double> sigma;  // k = min(rows, cols), sorted decreasing
  ComplexMatrix v;            // cols(A) x k, orthonormal columns
};

/// Thin SVD by one-sided Jacobi. Sized for the small channel matrices used
/// here; throws NumericError if the sweep cap is exceeded.
Svd svd(const ComplexMatrix& a);

struct Qr {
  RealMatrix q;  // orthogonal
  RealMatrix r;  // upper triangular, nonnegative diagonal
};

/// Householder QR of a square full-rank matrix. The sign convention
/// (diag(R) >= 0) makes the factorization unique, so repeated calls are
/// bit-identical. Throws NumericError on rank deficiency.
Qr qr(const RealMatrix& a);

}  // namespace cpmb
