// Independent reference implementations used only by tests. Each oracle is
// written from the mathematical definition, not by calling the library path
// it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ifl/langid.hpp"
#include "ifl/matrix.hpp"

namespace oracle {

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
struct JacobiResult {
  std::vector<double> values;  // descending
  ifl::Matrix vectors;         // columns aligned with values
};

inline JacobiResult jacobi_eig(ifl::Matrix a) {
  const std::size_t n = a.rows();
  ifl::Matrix v = ifl::Matrix::identity(n);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  JacobiResult result;
  result.vectors = ifl::Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    result.values.push_back(a(order[j], order[j]));
    for (std::size_t i = 0; i < n; ++i) result.vectors(i, j) = v(i, order[j]);
  }
  return result;
}

/// Squared distances straight from the definition, one coordinate at a time.
inline double sq_dist_rows(const ifl::Matrix& m, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double d = m(i, c) - m(j, c);
    s += d * d;
  }
  return s;
}

/// HSIC via the explicit centering matrix H = I - 11'/n and naive products.
inline double hsic_naive(const ifl::Matrix& k, const ifl::Matrix& l) {
  const std::size_t n = k.rows();
  ifl::Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / double(n);
  auto mult = [n](const ifl::Matrix& a, const ifl::Matrix& b) {
    ifl::Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += a(i, t) * b(t, j);
        c(i, j) = s;
      }
    return c;
  };
  const ifl::Matrix prod = mult(mult(mult(k, h), l), h);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += prod(i, i);
  return trace / (double(n - 1) * double(n - 1));
}

/// Determinant by cofactor expansion (fine for the k <= 5 designs here).
inline double det_cofactor(const ifl::Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  double d = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    ifl::Matrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t mc = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == col) continue;
        minor(i - 1, mc++) = a(i, j);
      }
    }
    d += (col % 2 == 0 ? 1.0 : -1.0) * a(0, col) * det_cofactor(minor);
  }
  return d;
}

/// Inverse via the adjugate; independent of the library's Gauss-Jordan path.
inline ifl::Matrix inverse_adjugate(const ifl::Matrix& a) {
  const std::size_t n = a.rows();
  const double d = det_cofactor(a);
  ifl::Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      ifl::Matrix minor(n - 1, n - 1);
      for (std::size_t r = 0, mr = 0; r < n; ++r) {
        if (r == i) continue;
        for (std::size_t c = 0, mc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(mr, mc++) = a(r, c);
        }
        ++mr;
      }
      const double cof = ((i + j) % 2 == 0 ? 1.0 : -1.0) *
                         (n == 1 ? 1.0 : det_cofactor(minor));
      inv(j, i) = cof / d;
    }
  return inv;
}

/// Normal-equation OLS with the adjugate inverse.
inline std::vector<double> ols_beta_naive(const ifl::Matrix& x, const std::vector<double>& y) {
  const std::size_t k = x.cols();
  ifl::Matrix g(k, k);
  std::vector<double> xty(k, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) g(i, j) += x(r, i) * x(r, j);
      xty[i] += x(r, i) * y[r];
    }
  const ifl::Matrix ginv = inverse_adjugate(g);
  std::vector<double> beta(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) beta[i] += ginv(i, j) * xty[j];
  return beta;
}

/// The label-collapsing rule as a flat 17-row truth table. Kept separate from
/// the library's branching code so the two can disagree.
inline std::string collapse_label_reference(const std::string& iso, const std::string& script) {
  static const std::map<std::string, std::string> by_script = {
      {"Hani", "chinese"}, {"Jpan", "japanese"}, {"Deva", "hindi"},
      {"Beng", "bengali"}, {"Hebr", "hebrew"},   {"Thai", "thai"},
      {"Cyrl", "russian"}, {"Zzzz", "none"},
  };
  if (auto it = by_script.find(script); it != by_script.end()) return it->second;
  if (script == "Arab") return iso == "urd" ? "urdu" : "arabic";
  if (script == "Latn") {
    static const std::map<std::string, std::string> by_iso = {
        {"deu", "german"}, {"eng", "english"}, {"spa", "spanish"},
        {"ron", "romanian"}, {"fra", "french"},
    };
    if (auto it = by_iso.find(iso); it != by_iso.end()) return it->second;
    return "other_latin";
  }
  return "other";
}

}  // namespace oracle
