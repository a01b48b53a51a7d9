#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {

/// Two-sided 95% normal quantile used by the design-effect intervals.
inline constexpr double kZ95 = 1.959964;

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Unbiased (n-1) sample variance.
inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error("variance needs at least two observations");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double sample_sd(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

/// Inverse standard-normal CDF (Acklam's rational approximation with one
/// Halley refinement; accurate to ~1e-15).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal quantile requires p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

/// z such that P(|Z| <= z) = confidence.
inline double z_for_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw Error("confidence must lie in (0,1)");
  return normal_quantile(0.5 + confidence / 2.0);
}

/// Round half away from zero at `digits` decimals. A small guard absorbs the
/// binary representation error of values that are exact decimals, so 0.0975
/// (stored as 0.09749999...) still rounds to 0.098.
inline double round_decimal(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::copysign(std::floor(std::abs(x) * scale + 0.5 + 1e-9), x) / scale;
}

/// Nearest integer, half away from zero, with the same decimal guard.
inline long long round_half_away(double x) {
  return static_cast<long long>(std::copysign(std::floor(std::abs(x) + 0.5 + 1e-9), x));
}

}  // namespace ifl
