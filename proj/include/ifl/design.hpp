#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ifl/dsl.hpp"
#include "ifl/error.hpp"
#include "ifl/langid.hpp"
#include "ifl/matrix.hpp"
#include "ifl/stats.hpp"

namespace ifl::design {

using langid::CanonicalLanguage;
using langid::Condition;
using langid::ResponseRecord;

/// One observation of the design-effect model: outcome plus the four binary
/// design indicators.
struct DesignRow {
  double fidelity = 0.0;
  bool image = false;
  bool lang_model_alt = false;  // reference LLM swapped for a bilingual one
  bool vision_alt = false;      // reference vision encoder swapped
  bool data_lang_alt = false;   // training data translated to the target language
};

inline std::vector<std::string> design_column_names(bool include_main_effects = false) {
  if (include_main_effects)
    return {"intercept", "image",           "lang_model",     "vision",
            "data_lang", "image_x_lang_model", "image_x_vision", "image_x_data_lang"};
  return {"intercept", "image", "image_x_lang_model", "image_x_vision", "image_x_data_lang"};
}

/// Design matrix with interaction-only structure: the three design factors
/// enter solely through their Image interactions. Main effects are available
/// behind a flag for sensitivity analysis.
inline Matrix build_design_matrix(const std::vector<DesignRow>& rows,
                                  bool include_main_effects = false) {
  const std::size_t cols = include_main_effects ? 8 : 5;
  if (rows.size() < cols)
    throw Error("need at least as many rows as design columns");
  Matrix x(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double img = r.image ? 1.0 : 0.0;
    std::size_t j = 0;
    x(i, j++) = 1.0;
    x(i, j++) = img;
    if (include_main_effects) {
      x(i, j++) = r.lang_model_alt ? 1.0 : 0.0;
      x(i, j++) = r.vision_alt ? 1.0 : 0.0;
      x(i, j++) = r.data_lang_alt ? 1.0 : 0.0;
    }
    x(i, j++) = img * (r.lang_model_alt ? 1.0 : 0.0);
    x(i, j++) = img * (r.vision_alt ? 1.0 : 0.0);
    x(i, j++) = img * (r.data_lang_alt ? 1.0 : 0.0);
  }
  return x;
}

struct RegressionResult {
  std::vector<double> coefficients;
  Matrix covariance;  // HC1 sandwich when robust, classical otherwise
  std::vector<double> std_errors;
  std::vector<std::pair<double, double>> ci95;
  std::vector<std::string> column_names;
  bool robust = true;
};

/// Ordinary least squares via the normal equations, with an HC1
/// heteroskedasticity-robust covariance by default. 95% intervals use the
/// fixed normal quantile 1.959964.
inline RegressionResult ols_fit(const Matrix& x, const std::vector<double>& y,
                                bool robust = true,
                                std::vector<std::string> column_names = {}) {
  if (x.rows() != y.size()) throw Error("design and outcome lengths differ");
  if (x.rows() < x.cols()) throw Error("fewer rows than design columns");
  const std::size_t n = x.rows();
  const std::size_t k = x.cols();
  if (column_names.empty())
    for (std::size_t j = 0; j < k; ++j) column_names.push_back("col" + std::to_string(j));
  if (column_names.size() != k) throw Error("column name count mismatch");

  const Matrix g = gram(x);
  Matrix ginv;
  try {
    ginv = inverse(g);
  } catch (const SingularMatrixError& e) {
    throw Error("design matrix is rank deficient: column '" + column_names[e.column()] +
                "' is collinear with earlier columns");
  }
  // beta = (X^T X)^-1 X^T y
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) xty[j] += x(i, j) * y[i];
  std::vector<double> beta = ginv * xty;

  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < k; ++j) fit += x(i, j) * beta[j];
    resid[i] = y[i] - fit;
  }

  Matrix cov(k, k);
  const double dof = static_cast<double>(n - k);
  if (robust) {
    // HC1: (X'X)^-1 (sum e_i^2 x_i x_i') (X'X)^-1 * n/(n-k)
    Matrix meat(k, k);
    for (std::size_t i = 0; i < n; ++i) {
      const double e2 = resid[i] * resid[i];
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) meat(a, b) += e2 * x(i, a) * x(i, b);
    }
    cov = ginv * meat * ginv;
    const double adj = static_cast<double>(n) / dof;
    for (auto& v : cov.data()) v *= adj;
  } else {
    double sse = 0.0;
    for (double e : resid) sse += e * e;
    const double sigma2 = sse / dof;
    cov = ginv;
    for (auto& v : cov.data()) v *= sigma2;
  }

  RegressionResult result;
  result.coefficients = std::move(beta);
  result.covariance = cov;
  result.column_names = std::move(column_names);
  result.robust = robust;
  for (std::size_t j = 0; j < k; ++j) {
    const double se = std::sqrt(std::max(cov(j, j), 0.0));
    result.std_errors.push_back(se);
    result.ci95.emplace_back(result.coefficients[j] - kZ95 * se,
                             result.coefficients[j] + kZ95 * se);
  }
  return result;
}

inline RegressionResult fit_design_effects(const std::vector<DesignRow>& rows,
                                           bool robust = true,
                                           bool include_main_effects = false) {
  const Matrix x = build_design_matrix(rows, include_main_effects);
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.fidelity);
  return ols_fit(x, y, robust, design_column_names(include_main_effects));
}

struct GroupEffect {
  std::string model;
  std::string dataset;
  dsl::IntervalEstimate effect;  // image-condition mean minus text-condition mean
};

/// Per-(model, benchmark) effect of the image condition on fidelity, debiased
/// through pseudo-outcomes. Negative values mean the image hurts fidelity.
inline std::vector<GroupEffect> estimate_ifl(const std::vector<ResponseRecord>& records,
                                             double confidence = 0.95) {
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<ResponseRecord>, std::vector<ResponseRecord>>>
      groups;
  for (const auto& rec : records) {
    auto& slot = groups[{rec.model, rec.dataset}];
    (rec.condition == Condition::image ? slot.first : slot.second).push_back(rec);
  }
  std::vector<GroupEffect> effects;
  effects.reserve(groups.size());
  for (const auto& [key, slot] : groups) {
    if (slot.first.empty() || slot.second.empty())
      throw Error("group (" + key.first + ", " + key.second + ") is missing a condition");
    const auto image_side = dsl::to_annotated(slot.first);
    const auto text_side = dsl::to_annotated(slot.second);
    effects.push_back(
        {key.first, key.second,
         dsl::dsl_difference(image_side.records, text_side.records, confidence)});
  }
  return effects;
}

/// One per-(dataset, language) intervention measurement. `diff` holds the
/// independently reported improvement when the source table prints one;
/// otherwise it is reconstructed as remedied minus baseline.
struct InterventionRow {
  std::string dataset;
  CanonicalLanguage language = CanonicalLanguage::english;
  double ifl = 0.0;
  double ifl_remedied = 0.0;
  std::optional<double> diff;
};

struct InterventionSummary {
  double avg_ifl = 0.0;       // mean baseline effect
  double avg_remedied = 0.0;  // avg_ifl + diff
  double diff = 0.0;          // mean per-row improvement
  std::optional<int> relative_increase_pct;  // absent when avg_ifl == 0
};

inline double printed(double x) { return round_decimal(x, 3); }

/// Average the intervention table. The remedied average is reconstructed as
/// avg_ifl + mean(diff) so that tables whose columns were rounded one by one
/// still aggregate consistently; the relative increase is the ratio of the
/// 3-decimal reported values, as a whole percentage.
inline InterventionSummary aggregate_intervention(const std::vector<InterventionRow>& rows) {
  if (rows.empty()) throw Error("no intervention rows");
  double sum_ifl = 0.0;
  double sum_diff = 0.0;
  for (const auto& row : rows) {
    sum_ifl += row.ifl;
    sum_diff += row.diff ? *row.diff : row.ifl_remedied - row.ifl;
  }
  const double n = static_cast<double>(rows.size());
  InterventionSummary s;
  s.avg_ifl = sum_ifl / n;
  s.diff = sum_diff / n;
  s.avg_remedied = s.avg_ifl + s.diff;
  const double ifl3 = printed(s.avg_ifl);
  if (ifl3 != 0.0) {
    s.relative_increase_pct =
        static_cast<int>(round_half_away(100.0 * printed(s.diff) / std::abs(ifl3)));
  }
  return s;
}

}  // namespace ifl::design
