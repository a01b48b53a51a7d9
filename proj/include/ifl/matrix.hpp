#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "ifl/error.hpp"
#include "ifl/rng.hpp"

namespace ifl {

/// Dense row-major matrix of doubles. Entries are expected to stay finite;
/// operations that can violate that document it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw Error("ragged row in matrix literal");
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error("matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw Error("matrix-vector shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

/// X^T X.
inline Matrix gram(const Matrix& x) {
  Matrix g(x.cols(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double xi = x(r, i);
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) g(i, j) += xi * x(r, j);
    }
  return g;
}

/// X^T Y.
inline Matrix crossprod(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw Error("crossprod row mismatch");
  Matrix c(x.cols(), y.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double xi = x(r, i);
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < y.cols(); ++j) c(i, j) += xi * y(r, j);
    }
  return c;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

/// Thrown when a pivot collapses during inversion; `column` is the offending
/// (near-collinear) column index.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t column, const std::string& what)
      : Error(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Gauss-Jordan inverse with partial (row) pivoting. Column order is never
/// permuted, so a failed pivot identifies the collinear column directly.
inline Matrix inverse(Matrix a, double rel_pivot_tol = 1e-12) {
  if (a.rows() != a.cols()) throw Error("inverse requires a square matrix");
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw SingularMatrixError(0, "cannot invert zero matrix");
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) <= rel_pivot_tol * scale)
      throw SingularMatrixError(col, "matrix is singular at column " + std::to_string(col));
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const double p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// Subtract each column's mean so every column sums to zero.
inline Matrix center_columns(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("empty input");
  Matrix out = m;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) -= mean;
  }
  return out;
}

/// Squared Euclidean distances between all row pairs, straight from the
/// definition sum_c (m[i,c]-m[j,c])^2. Symmetric with a zero diagonal.
inline Matrix pairwise_sq_dists(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("empty input");
  const std::size_t n = m.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double diff = m(i, c) - m(j, c);
        s += diff * diff;
      }
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

struct EigResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // n x k, unit-norm columns
};

/// Top-k eigenpairs of a symmetric matrix by deflated power iteration with
/// Gram-Schmidt re-orthogonalization. A Gershgorin shift keeps the iterated
/// operator PSD so the dominant eigenvalue is the algebraically largest.
/// Residual ||A v - lambda v|| <= tol for every returned pair.
inline EigResult top_k_eigvecs(const Matrix& sym, std::size_t k, double tol = 1e-9,
                               std::size_t max_iter = 10000) {
  if (sym.rows() != sym.cols()) throw Error("eigensolver requires a square matrix");
  const std::size_t n = sym.rows();
  if (k > n) throw Error("requested more eigenpairs than matrix dimension");
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      asym = std::max(asym, std::abs(sym(i, j) - sym(j, i)));
  if (asym > 1e-8) throw Error("matrix is not symmetric");

  // Shift so all eigenvalues are nonnegative (Gershgorin lower bound).
  double lower = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) off += std::abs(sym(i, j));
    lower = std::min(lower, sym(i, i) - off);
  }
  const double shift = lower < 0.0 ? -lower : 0.0;
  Matrix b = sym;
  for (std::size_t i = 0; i < n; ++i) b(i, i) += shift;

  EigResult result;
  result.vectors = Matrix(n, k);
  SeededRng rng(0x5eedULL);  // fixed internal stream keeps the op pure

  std::vector<std::vector<double>> found;
  for (std::size_t pair = 0; pair < k; ++pair) {
    std::vector<double> v(n);
    for (auto& e : v) e = rng.normal();
    auto orthogonalize = [&](std::vector<double>& w) {
      for (const auto& u : found) {
        const double c = dot(w, u);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
      }
    };
    orthogonalize(v);
    double nv = norm2(v);
    if (nv == 0.0) throw Error("degenerate start vector in power iteration");
    for (auto& e : v) e /= nv;

    double lambda = 0.0;
    bool converged = false;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
      std::vector<double> w = b * v;
      orthogonalize(w);
      const double nw = norm2(w);
      if (nw > 0.0)
        for (auto& e : w) e /= nw;
      v = w;
      // Residual against the original matrix.
      std::vector<double> av = sym * v;
      lambda = dot(v, av);
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = av[i] - lambda * v[i];
        res += r * r;
      }
      if (std::sqrt(res) <= tol) {
        converged = true;
        ++iter;
        break;
      }
    }
    if (!converged)
      throw Error("power iteration failed to converge after " + std::to_string(iter) +
                  " iterations");
    // Deflate the shifted operator.
    const double mu = lambda + shift;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b(i, j) -= mu * v[i] * v[j];
    result.values.push_back(lambda);
    for (std::size_t i = 0; i < n; ++i) result.vectors(i, pair) = v[i];
    found.push_back(std::move(v));
  }
  return result;
}

}  // namespace ifl
