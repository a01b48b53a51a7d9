#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ifl/error.hpp"
#include "ifl/langid.hpp"
#include "ifl/rng.hpp"
#include "ifl/stats.hpp"

namespace ifl::dsl {

using langid::CanonicalLanguage;
using langid::ResponseRecord;

/// One record in the debiasing sample: proxy label, optional gold label,
/// annotation indicator and inclusion probability.
struct AnnotatedRecord {
  double proxy = 0.0;                // in [0,1]
  std::optional<double> gold;        // in [0,1], present iff annotated
  bool annotated = false;
  double inclusion_prob = 1.0;       // in (0,1]
};

struct StratumWeights {
  std::vector<double> raw;             // proportional sampling weight per record
  std::vector<double> inclusion_prob;  // capped, renormalized marginal probability
};

inline double language_multiplier(CanonicalLanguage lang) {
  switch (lang) {
    case CanonicalLanguage::german: return 4.0;
    case CanonicalLanguage::chinese:
    case CanonicalLanguage::hindi: return 2.0;
    case CanonicalLanguage::romanian:
    case CanonicalLanguage::russian:
    case CanonicalLanguage::urdu: return 0.5;
    default: return 1.0;
  }
}

/// Stratified annotation-sampling weights: records are weighted by the
/// inverse share of their benchmark and a per-language multiplier, then
/// converted to inclusion probabilities capped at 1 and renormalized so the
/// expected sample size equals `sample_size`.
inline StratumWeights compute_sampling_weights(const std::vector<ResponseRecord>& records,
                                               std::size_t sample_size) {
  if (sample_size == 0) throw Error("sample size must be positive");
  if (sample_size > records.size())
    throw Error("sample size exceeds record count");
  static const std::set<std::string> known_datasets = {"llavaw", "maxm", "visitazure", "multiq"};
  std::map<std::string, std::size_t> benchmark_n;
  for (const auto& rec : records) {
    if (!known_datasets.count(rec.dataset))
      throw Error("unknown dataset key: " + rec.dataset);
    benchmark_n[rec.dataset] += 1;
  }
  const double total = static_cast<double>(records.size());
  StratumWeights weights;
  weights.raw.reserve(records.size());
  for (const auto& rec : records)
    weights.raw.push_back(total / static_cast<double>(benchmark_n[rec.dataset]) *
                          language_multiplier(rec.language));

  // Cap probabilities at 1 and redistribute the remaining expected count
  // among uncapped records until no new record crosses the cap.
  const std::size_t n = records.size();
  weights.inclusion_prob.assign(n, 0.0);
  std::vector<bool> capped(n, false);
  std::size_t capped_count = 0;
  for (;;) {
    double uncapped_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!capped[i]) uncapped_sum += weights.raw[i];
    const double remaining = static_cast<double>(sample_size) - static_cast<double>(capped_count);
    if (uncapped_sum <= 0.0 || remaining <= 0.0) break;
    const double c = remaining / uncapped_sum;
    bool new_cap = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      if (c * weights.raw[i] >= 1.0) {
        capped[i] = true;
        ++capped_count;
        new_cap = true;
      }
    }
    if (!new_cap) {
      for (std::size_t i = 0; i < n; ++i)
        if (!capped[i]) weights.inclusion_prob[i] = c * weights.raw[i];
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (capped[i]) weights.inclusion_prob[i] = 1.0;
  return weights;
}

/// Bias-corrected pseudo-outcome per record:
///   Ytilde = proxy + (R/pi) * (gold - proxy),  with R/pi := 0 when R = 0.
inline std::vector<double> pseudo_outcomes(const std::vector<AnnotatedRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.annotated && !rec.gold)
      throw Error("annotated record is missing its gold label");
    if (rec.inclusion_prob <= 0.0)
      throw Error("inclusion probability must be positive");
    double y = rec.proxy;
    if (rec.annotated) y += (*rec.gold - rec.proxy) / rec.inclusion_prob;
    out.push_back(y);
  }
  return out;
}

struct IntervalEstimate {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

enum class VarianceMethod { plugin, bootstrap };

/// Debiased mean with a normal confidence interval. The plug-in method uses
/// the i.i.d. standard error of the pseudo-outcomes; the bootstrap method
/// replaces it with the standard deviation of resampled means.
inline IntervalEstimate dsl_mean_ci(const std::vector<AnnotatedRecord>& records,
                                    double confidence = 0.95,
                                    VarianceMethod method = VarianceMethod::plugin,
                                    SeededRng* rng = nullptr,
                                    std::size_t bootstrap_resamples = 2000) {
  if (records.size() < 2) throw Error("need at least two records");
  bool any_annotated = false;
  for (const auto& rec : records) any_annotated |= rec.annotated;
  if (!any_annotated) throw Error("no gold labels");
  const double z = z_for_confidence(confidence);
  const std::vector<double> outcomes = pseudo_outcomes(records);
  const double est = mean(outcomes);
  double se = 0.0;
  if (method == VarianceMethod::plugin) {
    se = sample_sd(outcomes) / std::sqrt(static_cast<double>(outcomes.size()));
  } else {
    if (rng == nullptr) throw Error("bootstrap variance needs a random source");
    std::vector<double> means;
    means.reserve(bootstrap_resamples);
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < outcomes.size(); ++i)
        s += outcomes[rng->below(outcomes.size())];
      means.push_back(s / static_cast<double>(outcomes.size()));
    }
    se = sample_sd(means);
  }
  return {est, est - z * se, est + z * se, se, records.size()};
}

/// Difference of two independent debiased means with a combined-variance CI.
inline IntervalEstimate dsl_difference(const std::vector<AnnotatedRecord>& a,
                                       const std::vector<AnnotatedRecord>& b,
                                       double confidence = 0.95) {
  const IntervalEstimate ea = dsl_mean_ci(a, confidence);
  const IntervalEstimate eb = dsl_mean_ci(b, confidence);
  const double z = z_for_confidence(confidence);
  const double est = ea.estimate - eb.estimate;
  const double se = std::sqrt(ea.se * ea.se + eb.se * eb.se);
  return {est, est - z * se, est + z * se, se, a.size() + b.size()};
}

struct AnnotatedConversion {
  std::vector<AnnotatedRecord> records;
  std::size_t na_excluded = 0;  // annotated but incoherent; treated as unannotated
};

/// Build the debiasing sample from scored response records. Records whose
/// expert label is NA count as unannotated and are tallied separately.
inline AnnotatedConversion to_annotated(const std::vector<ResponseRecord>& records) {
  AnnotatedConversion out;
  out.records.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.proxy_fidelity)
      throw Error("record " + rec.id + " has no proxy fidelity score");
    AnnotatedRecord a;
    a.proxy = *rec.proxy_fidelity;
    a.inclusion_prob = rec.inclusion_prob.value_or(1.0);
    if (rec.expert_na) {
      out.na_excluded += 1;
    } else if (rec.expert_fidelity) {
      a.annotated = true;
      a.gold = static_cast<double>(*rec.expert_fidelity);
    }
    out.records.push_back(a);
  }
  return out;
}

}  // namespace ifl::dsl
