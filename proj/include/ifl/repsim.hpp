#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ifl/error.hpp"
#include "ifl/langid.hpp"
#include "ifl/matrix.hpp"

namespace ifl::repsim {

using langid::CanonicalLanguage;

enum class Modality { image, text };

inline const char* to_string(Modality m) { return m == Modality::image ? "image" : "text"; }

inline Modality modality_from_string(std::string_view s) {
  if (s == "image") return Modality::image;
  if (s == "text") return Modality::text;
  throw Error("unknown modality: " + std::string(s));
}

struct TokenMeta {
  Modality modality = Modality::text;
  CanonicalLanguage language = CanonicalLanguage::none;
};

/// Layer-tagged block of token hidden states with per-token metadata.
struct ActivationTrace {
  std::string model;
  std::size_t layer = 0;
  Matrix hidden;  // tokens x hidden_dim
  std::vector<TokenMeta> token_meta;

  void validate() const {
    if (token_meta.size() != hidden.rows())
      throw Error("token_meta length mismatch");
    if (!hidden.all_finite()) throw Error("trace contains non-finite values");
  }
};

/// Feature-form linear CKA: ||Y'X||_F^2 / (||X'X||_F ||Y'Y||_F) on
/// column-centered inputs. Invariant to orthogonal rotation and nonzero
/// isotropic scaling of either argument.
inline double linear_cka(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw Error("row counts differ");
  if (x.rows() < 3) throw Error("need at least three rows");
  const Matrix xc = center_columns(x);
  const Matrix yc = center_columns(y);
  const double xx = frobenius_norm(gram(xc));
  const double yy = frobenius_norm(gram(yc));
  if (xx <= 1e-300 || yy <= 1e-300) throw Error("degenerate representation");
  const double xy = frobenius_norm(crossprod(yc, xc));
  const double value = (xy * xy) / (xx * yy);
  return std::min(value, 1.0);
}

/// HSIC(K, L) = tr(K H L H) / (n-1)^2 with H the centering matrix, computed
/// by double-centering both kernels.
inline double hsic(const Matrix& k, const Matrix& l) {
  if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows())
    throw Error("kernel shape mismatch");
  const std::size_t n = k.rows();
  if (n < 3) throw Error("need at least three rows");
  auto double_center = [n](const Matrix& m) {
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) row_mean[i] += m(i, j);
      grand += row_mean[i];
      row_mean[i] /= static_cast<double>(n);
    }
    grand /= static_cast<double>(n * n);
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        c(i, j) = m(i, j) - row_mean[i] - row_mean[j] + grand;
    return c;
  };
  const Matrix kc = double_center(k);
  const Matrix lc = double_center(l);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += kc(i, j) * lc(i, j);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  return s / denom;
}

/// Kernel-form CKA: HSIC(Kx,Ky) / sqrt(HSIC(Kx,Kx) HSIC(Ky,Ky)).
inline double kernel_cka(const Matrix& kx, const Matrix& ky) {
  auto check_symmetric = [](const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i + 1; j < m.cols(); ++j)
        if (std::abs(m(i, j) - m(j, i)) > 1e-8) throw Error("kernel is not symmetric");
  };
  check_symmetric(kx);
  check_symmetric(ky);
  const double hxx = hsic(kx, kx);
  const double hyy = hsic(ky, ky);
  if (hxx <= 1e-300 || hyy <= 1e-300) throw Error("degenerate kernel");
  const double value = hsic(kx, ky) / std::sqrt(hxx * hyy);
  return std::clamp(value, 0.0, 1.0);
}

/// Gaussian kernel with bandwidth sigma = bandwidth_frac * median pairwise
/// distance (median over off-diagonal entries). Scaling all points by a
/// constant leaves the kernel unchanged by construction.
inline Matrix rbf_kernel(const Matrix& m, double bandwidth_frac = 1.0) {
  if (m.rows() < 2) throw Error("need at least two rows");
  const Matrix d2 = pairwise_sq_dists(m);
  const std::size_t n = m.rows();
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dists.push_back(std::sqrt(d2(i, j)));
  std::sort(dists.begin(), dists.end());
  const std::size_t half = dists.size() / 2;
  const double median = dists.size() % 2 == 1
                            ? dists[half]
                            : 0.5 * (dists[half - 1] + dists[half]);
  const double sigma = bandwidth_frac * median;
  if (sigma <= 0.0) throw Error("all points identical: zero bandwidth");
  Matrix k(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp(-d2(i, j) / (2.0 * sigma * sigma));
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

/// Layer-pair similarity grid: linear CKA on and below the diagonal, RBF CKA
/// above it.
struct CkaGrid {
  std::size_t layers_a = 0;
  std::size_t layers_b = 0;
  Matrix values;
  std::string kernel_layout = "linear_lower_rbf_upper";
};

using TokenFilter = std::function<bool(const TokenMeta&)>;

inline Matrix filter_tokens(const ActivationTrace& trace, const TokenFilter& filter) {
  trace.validate();
  if (!filter) return trace.hidden;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < trace.token_meta.size(); ++i)
    if (filter(trace.token_meta[i])) keep.push_back(i);
  if (keep.empty()) throw Error("token filter matched nothing");
  Matrix out(keep.size(), trace.hidden.cols());
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < trace.hidden.cols(); ++c)
      out(r, c) = trace.hidden(keep[r], c);
  return out;
}

inline CkaGrid cka_grid(const std::vector<ActivationTrace>& traces_a,
                        const std::vector<ActivationTrace>& traces_b,
                        const TokenFilter& filter = {}, double bandwidth_frac = 1.0) {
  if (traces_a.empty() || traces_b.empty()) throw Error("empty trace set");
  std::vector<Matrix> xs, ys;
  xs.reserve(traces_a.size());
  ys.reserve(traces_b.size());
  for (const auto& t : traces_a) xs.push_back(filter_tokens(t, filter));
  for (const auto& t : traces_b) ys.push_back(filter_tokens(t, filter));
  const std::size_t n = xs.front().rows();
  for (const auto& m : xs)
    if (m.rows() != n) throw Error("misaligned token counts");
  for (const auto& m : ys)
    if (m.rows() != n) throw Error("misaligned token counts");

  CkaGrid grid;
  grid.layers_a = xs.size();
  grid.layers_b = ys.size();
  grid.values = Matrix(xs.size(), ys.size());
  std::vector<Matrix> rbf_a(xs.size()), rbf_b(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (i >= j) {
        grid.values(i, j) = linear_cka(xs[i], ys[j]);
      } else {
        if (rbf_a[i].empty()) rbf_a[i] = rbf_kernel(xs[i], bandwidth_frac);
        if (rbf_b[j].empty()) rbf_b[j] = rbf_kernel(ys[j], bandwidth_frac);
        grid.values(i, j) = kernel_cka(rbf_a[i], rbf_b[j]);
      }
    }
  return grid;
}

enum class Labeling { modality, language };

/// Mean silhouette coefficient of the tokens under the chosen labeling,
/// with Euclidean distances. Near 1 means the labels occupy well-separated
/// regions; near 0 means no separation.
inline double separation_silhouette(const ActivationTrace& trace, Labeling labeling) {
  trace.validate();
  const std::size_t n = trace.hidden.rows();
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i)
    label[i] = labeling == Labeling::modality
                   ? static_cast<int>(trace.token_meta[i].modality)
                   : static_cast<int>(trace.token_meta[i].language);
  std::map<int, std::size_t> cluster_size;
  for (int l : label) cluster_size[l] += 1;
  if (cluster_size.size() < 2) throw Error("need at least two labels");
  for (const auto& [l, size] : cluster_size)
    if (size < 2) throw Error("every label needs at least two tokens");

  const Matrix d2 = pairwise_sq_dists(trace.hidden);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, std::size_t>> per_cluster;  // sum dist, count
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& slot = per_cluster[label[j]];
      slot.first += std::sqrt(d2(i, j));
      slot.second += 1;
    }
    const double a = per_cluster[label[i]].first /
                     static_cast<double>(per_cluster[label[i]].second);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, slot] : per_cluster) {
      if (l == label[i]) continue;
      b = std::min(b, slot.first / static_cast<double>(slot.second));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

struct Projection2D {
  Matrix scores;  // tokens x 2
  std::array<double, 2> explained_variance = {0.0, 0.0};  // fractions of total
};

/// Project tokens onto the top-2 principal axes of the centered token matrix.
inline Projection2D pca_project_2d(const ActivationTrace& trace) {
  trace.validate();
  const std::size_t n = trace.hidden.rows();
  if (n < 3) throw Error("need at least three tokens");
  if (trace.hidden.cols() < 2) throw Error("need hidden dimension of at least two");
  const Matrix xc = center_columns(trace.hidden);
  Matrix cov = gram(xc);
  for (auto& v : cov.data()) v /= static_cast<double>(n - 1);
  double total = 0.0;
  for (std::size_t j = 0; j < cov.cols(); ++j) total += cov(j, j);
  if (total <= 1e-300) throw Error("degenerate covariance: zero variance");
  // clustered spectra (e.g. symmetric group structure) converge slowly, so
  // give the iteration a generous budget
  const EigResult eig = top_k_eigvecs(cov, 2, 1e-9, 200000);
  Projection2D out;
  out.scores = xc * eig.vectors;
  for (std::size_t i = 0; i < 2; ++i)
    out.explained_variance[i] = std::max(eig.values[i], 0.0) / total;
  return out;
}

}  // namespace ifl::repsim
