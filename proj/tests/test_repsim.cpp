#include <catch2/catch_amalgamated.hpp>

#include "ifl/repsim.hpp"
#include "ifl/steer.hpp"
#include "oracles.hpp"

using namespace ifl;
using namespace ifl::repsim;

namespace {

Matrix random_matrix(SeededRng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

// random orthogonal matrix from Gram-Schmidt on a Gaussian draw
Matrix random_orthogonal(SeededRng& rng, std::size_t n) {
  Matrix q(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> v(n);
    for (auto& e : v) e = rng.normal();
    for (std::size_t prev = 0; prev < col; ++prev) {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += v[i] * q(i, prev);
      for (std::size_t i = 0; i < n; ++i) v[i] -= c * q(i, prev);
    }
    const double nv = norm2(v);
    for (std::size_t i = 0; i < n; ++i) q(i, col) = v[i] / nv;
  }
  return q;
}

ActivationTrace trace_of(const Matrix& hidden) {
  ActivationTrace t;
  t.hidden = hidden;
  t.token_meta.assign(hidden.rows(), {});
  return t;
}

}  // namespace

TEST_CASE("linear CKA of a matrix with itself is one") {
  SeededRng rng(1);
  const Matrix x = random_matrix(rng, 12, 5);
  CHECK(linear_cka(x, x) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("linear CKA is symmetric and invariant to rotation and scale") {
  SeededRng rng(2);
  const Matrix x = random_matrix(rng, 15, 6);
  const Matrix y = random_matrix(rng, 15, 4);
  CHECK(linear_cka(x, y) == Catch::Approx(linear_cka(y, x)).margin(1e-12));

  const Matrix q = random_orthogonal(rng, 6);
  const Matrix xq = x * q;
  CHECK(linear_cka(x, xq) == Catch::Approx(1.0).margin(1e-8));
  CHECK(linear_cka(xq, y) == Catch::Approx(linear_cka(x, y)).margin(1e-8));

  Matrix scaled = x;
  for (auto& v : scaled.data()) v *= -3.7;
  CHECK(linear_cka(x, scaled) == Catch::Approx(1.0).margin(1e-8));
  CHECK(linear_cka(scaled, y) == Catch::Approx(linear_cka(x, y)).margin(1e-8));
}

TEST_CASE("feature-form linear CKA equals the HSIC form with linear kernels") {
  SeededRng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = random_matrix(rng, 20, 8);
    const Matrix y = random_matrix(rng, 20, 5);
    Matrix kx(20, 20), ky(20, 20);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j) {
        double sx = 0.0, sy = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) sx += x(i, c) * x(j, c);
        for (std::size_t c = 0; c < y.cols(); ++c) sy += y(i, c) * y(j, c);
        kx(i, j) = sx;
        ky(i, j) = sy;
      }
    CHECK(linear_cka(x, y) == Catch::Approx(kernel_cka(kx, ky)).margin(1e-8));
  }
}

TEST_CASE("linear CKA input validation") {
  using Catch::Matchers::ContainsSubstring;
  SeededRng rng(4);
  const Matrix x = random_matrix(rng, 2, 3);
  CHECK_THROWS_WITH(linear_cka(x, x), ContainsSubstring("three rows"));
  Matrix constant(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) constant(i, j) = double(j);
  const Matrix ok = random_matrix(rng, 5, 3);
  CHECK_THROWS_WITH(linear_cka(constant, ok), ContainsSubstring("degenerate"));
}

TEST_CASE("kernel CKA of a kernel with itself is one") {
  SeededRng rng(5);
  const Matrix x = random_matrix(rng, 9, 4);
  const Matrix k = rbf_kernel(x);
  CHECK(kernel_cka(k, k) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("kernel CKA matches the naive centered-trace oracle") {
  SeededRng rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = random_matrix(rng, 5, 3);
    const Matrix b = random_matrix(rng, 5, 3);
    const Matrix ka = rbf_kernel(a);
    const Matrix kb = rbf_kernel(b);
    CHECK(hsic(ka, kb) == Catch::Approx(oracle::hsic_naive(ka, kb)).margin(1e-10));
    const double expected =
        oracle::hsic_naive(ka, kb) /
        std::sqrt(oracle::hsic_naive(ka, ka) * oracle::hsic_naive(kb, kb));
    CHECK(kernel_cka(ka, kb) == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("kernel CKA rejects degenerate and asymmetric kernels") {
  using Catch::Matchers::ContainsSubstring;
  const Matrix ones(4, 4, 1.0);
  CHECK_THROWS_WITH(kernel_cka(ones, ones), ContainsSubstring("degenerate"));
  SeededRng rng(7);
  Matrix asym = random_matrix(rng, 4, 4);
  asym(0, 1) = asym(1, 0) + 1.0;
  const Matrix k = rbf_kernel(random_matrix(rng, 4, 2));
  CHECK_THROWS_WITH(kernel_cka(asym, k), ContainsSubstring("not symmetric"));
}

TEST_CASE("rbf kernel has a unit diagonal and the closed-form off-diagonal") {
  const Matrix two = Matrix::from_rows({{0.0, 0.0}, {3.0, 4.0}});  // distance 5
  const Matrix k = rbf_kernel(two);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(1, 1) == 1.0);
  // sigma = median distance = 5, so exp(-25/50) = exp(-1/2)
  CHECK(k(0, 1) == Catch::Approx(0.6065306597).margin(1e-9));
}

TEST_CASE("rbf kernel is invariant to scaling all coordinates") {
  SeededRng rng(8);
  const Matrix x = random_matrix(rng, 7, 3);
  Matrix doubled = x;
  for (auto& v : doubled.data()) v *= 2.0;
  const Matrix ka = rbf_kernel(x);
  const Matrix kb = rbf_kernel(doubled);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(ka(i, j) == Catch::Approx(kb(i, j)).margin(1e-12));
}

TEST_CASE("rbf kernel rejects identical points") {
  CHECK_THROWS_WITH(rbf_kernel(Matrix(4, 2, 1.0)),
                    Catch::Matchers::ContainsSubstring("zero bandwidth"));
}

TEST_CASE("cka grid of a trace set with itself has a unit diagonal") {
  SeededRng rng(9);
  std::vector<ActivationTrace> traces;
  for (int l = 0; l < 3; ++l) traces.push_back(trace_of(random_matrix(rng, 10, 4)));
  const CkaGrid grid = cka_grid(traces, traces);
  for (std::size_t i = 0; i < 3; ++i) CHECK(grid.values(i, i) == Catch::Approx(1.0).margin(1e-9));
  for (double v : grid.values.data()) {
    CHECK(v >= -1e-9);
    CHECK(v <= 1.0 + 1e-9);
  }
}

TEST_CASE("independent random traces give small grid entries") {
  SeededRng rng(10);
  std::vector<ActivationTrace> a, b;
  for (int l = 0; l < 3; ++l) {
    a.push_back(trace_of(random_matrix(rng, 50, 4)));
    b.push_back(trace_of(random_matrix(rng, 50, 4)));
  }
  const CkaGrid grid = cka_grid(a, b);
  for (double v : grid.values.data()) CHECK(v < 0.3);
}

TEST_CASE("cka grid validates alignment and filters") {
  using Catch::Matchers::ContainsSubstring;
  SeededRng rng(11);
  std::vector<ActivationTrace> a = {trace_of(random_matrix(rng, 8, 3))};
  std::vector<ActivationTrace> b = {trace_of(random_matrix(rng, 9, 3))};
  CHECK_THROWS_WITH(cka_grid(a, b), ContainsSubstring("misaligned"));
  const TokenFilter nothing = [](const TokenMeta&) { return false; };
  CHECK_THROWS_WITH(cka_grid(a, a, nothing), ContainsSubstring("matched nothing"));
}

TEST_CASE("grids from two differently seeded toy models peak along matched depth") {
  auto grid_config = [](std::uint64_t seed) {
    auto config = steer::default_toy_config(10, seed);
    config.embed_noise = 1.0;
    config.direction_gain = 0.3;
    config.amplifier_gain = 0.15;
    return config;
  };
  const auto model_a = steer::build_toy_lm(grid_config(102));
  const auto model_b = steer::build_toy_lm(grid_config(202));
  std::vector<steer::TokenId> prompt;
  for (auto lang : {langid::CanonicalLanguage::english, langid::CanonicalLanguage::german,
                    langid::CanonicalLanguage::chinese, langid::CanonicalLanguage::spanish}) {
    const auto part = steer::make_prompt(model_a.config, lang, 6);
    prompt.insert(prompt.end(), part.begin(), part.end());
  }
  const auto grid = cka_grid(steer::export_traces(model_a, prompt, "a"),
                             steer::export_traces(model_b, prompt, "b"));
  double diag = 0.0, off = 0.0;
  std::size_t nd = 0, no = 0;
  for (std::size_t i = 0; i < grid.layers_a; ++i)
    for (std::size_t j = 0; j < grid.layers_b; ++j) {
      CHECK(grid.values(i, j) >= -1e-9);
      CHECK(grid.values(i, j) <= 1.0 + 1e-9);
      if (i == j) {
        diag += grid.values(i, j);
        ++nd;
      } else {
        off += grid.values(i, j);
        ++no;
      }
    }
  CHECK(diag / double(nd) > off / double(no));
}

namespace {

ActivationTrace planted_clusters(SeededRng& rng, std::size_t per_cluster, double separation) {
  ActivationTrace trace;
  trace.hidden = Matrix(2 * per_cluster, 4);
  for (std::size_t i = 0; i < 2 * per_cluster; ++i) {
    const double center = i < per_cluster ? 0.0 : separation;
    for (std::size_t j = 0; j < 4; ++j)
      trace.hidden(i, j) = rng.normal() + (j == 0 ? center : 0.0);
    trace.token_meta.push_back(
        {i < per_cluster ? Modality::text : Modality::image, langid::CanonicalLanguage::none});
  }
  return trace;
}

}  // namespace

TEST_CASE("silhouette separates planted clusters and stays near zero on nulls") {
  SeededRng rng(12);
  const auto planted = planted_clusters(rng, 30, 20.0);
  CHECK(separation_silhouette(planted, Labeling::modality) > 0.8);

  ActivationTrace null_trace;
  null_trace.hidden = random_matrix(rng, 60, 4);
  for (std::size_t i = 0; i < 60; ++i)
    null_trace.token_meta.push_back(
        {i % 2 ? Modality::image : Modality::text, langid::CanonicalLanguage::none});
  CHECK(std::abs(separation_silhouette(null_trace, Labeling::modality)) < 0.1);
}

TEST_CASE("silhouette is invariant to translating every token") {
  SeededRng rng(13);
  auto trace = planted_clusters(rng, 10, 6.0);
  const double before = separation_silhouette(trace, Labeling::modality);
  for (std::size_t i = 0; i < trace.hidden.rows(); ++i)
    for (std::size_t j = 0; j < trace.hidden.cols(); ++j) trace.hidden(i, j) += 100.0;
  CHECK(separation_silhouette(trace, Labeling::modality) == Catch::Approx(before).margin(1e-9));
}

TEST_CASE("silhouette is invariant to swapping label names") {
  SeededRng rng(14);
  auto trace = planted_clusters(rng, 10, 6.0);
  const double before = separation_silhouette(trace, Labeling::modality);
  for (auto& meta : trace.token_meta)
    meta.modality = meta.modality == Modality::image ? Modality::text : Modality::image;
  CHECK(separation_silhouette(trace, Labeling::modality) == Catch::Approx(before).margin(1e-12));
}

TEST_CASE("silhouette validates label structure") {
  using Catch::Matchers::ContainsSubstring;
  SeededRng rng(15);
  ActivationTrace single;
  single.hidden = random_matrix(rng, 6, 3);
  single.token_meta.assign(6, {Modality::text, langid::CanonicalLanguage::none});
  CHECK_THROWS_WITH(separation_silhouette(single, Labeling::modality),
                    ContainsSubstring("two labels"));
  single.token_meta[0].modality = Modality::image;
  CHECK_THROWS_WITH(separation_silhouette(single, Labeling::modality),
                    ContainsSubstring("at least two tokens"));
}

TEST_CASE("pca projection of collinear data has no second component") {
  Matrix hidden(6, 4);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) hidden(i, j) = double(i) * (j + 1.0);
  const auto projection = pca_project_2d(trace_of(hidden));
  CHECK(projection.explained_variance[0] == Catch::Approx(1.0).margin(1e-8));
  CHECK(projection.explained_variance[1] < 1e-8);
}

TEST_CASE("explained variance fractions are rotation invariant") {
  SeededRng rng(16);
  Matrix hidden = random_matrix(rng, 12, 5);
  for (std::size_t i = 0; i < 12; ++i) hidden(i, 0) *= 4.0;  // a dominant axis
  const auto before = pca_project_2d(trace_of(hidden));
  const Matrix q = random_orthogonal(rng, 5);
  const auto after = pca_project_2d(trace_of(hidden * q));
  CHECK(after.explained_variance[0] == Catch::Approx(before.explained_variance[0]).margin(1e-8));
  CHECK(after.explained_variance[1] == Catch::Approx(before.explained_variance[1]).margin(1e-8));
}

TEST_CASE("pca projection matches the full eigendecomposition oracle") {
  SeededRng rng(17);
  const Matrix hidden = random_matrix(rng, 10, 3);
  const auto projection = pca_project_2d(trace_of(hidden));

  const Matrix xc = center_columns(hidden);
  Matrix cov = gram(xc);
  for (auto& v : cov.data()) v /= 9.0;
  const auto full = oracle::jacobi_eig(cov);
  const Matrix expected = xc * full.vectors;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(std::abs(projection.scores(i, j)) ==
            Catch::Approx(std::abs(expected(i, j))).margin(1e-6));
}

TEST_CASE("pca rejects rank-zero input") {
  CHECK_THROWS_WITH(pca_project_2d(trace_of(Matrix(5, 3, 2.0))),
                    Catch::Matchers::ContainsSubstring("degenerate covariance"));
}
