#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "commetric/errors.hpp"

namespace commetric {

enum class BelongingKind { average, product, logistic };

/// Rule combining two belonging coefficients into a pair weight.
///
/// The logistic form is F(a, b) = s(a) s(b) with s(x) = 1 / (1 + exp(-(2px - p))).
/// All three kinds are separable (sums of products of one-sided terms), which
/// the metric kernels exploit to evaluate pair sums in linear time.
struct BelongingFunction {
  static constexpr double default_steepness = 30.0;

  BelongingKind kind = BelongingKind::product;
  double p = default_steepness;

  static constexpr BelongingFunction average() { return {BelongingKind::average, default_steepness}; }
  static constexpr BelongingFunction product() { return {BelongingKind::product, default_steepness}; }
  static constexpr BelongingFunction logistic(double p = default_steepness) {
    return {BelongingKind::logistic, p};
  }

  /// One-sided logistic factor s(x).
  double sigmoid(double x) const { return 1.0 / (1.0 + std::exp(-(2.0 * p * x - p))); }

  double operator()(double a, double b) const {
    switch (kind) {
      case BelongingKind::average:
        return 0.5 * (a + b);
      case BelongingKind::product:
        return a * b;
      case BelongingKind::logistic:
        return sigmoid(a) * sigmoid(b);
    }
    return 0.0;
  }

  std::string_view name() const {
    switch (kind) {
      case BelongingKind::average:
        return "average";
      case BelongingKind::product:
        return "product";
      case BelongingKind::logistic:
        return "logistic";
    }
    return "?";
  }

  friend bool operator==(const BelongingFunction&, const BelongingFunction&) = default;
};

inline BelongingFunction parse_belonging_function(std::string_view name,
                                                  double p = BelongingFunction::default_steepness) {
  if (name == "average") return BelongingFunction::average();
  if (name == "product") return BelongingFunction::product();
  if (name == "logistic") return BelongingFunction::logistic(p);
  throw ArgumentError("unknown belonging function '" + std::string(name) +
                      "' (expected average, product or logistic)");
}

}  // namespace commetric
