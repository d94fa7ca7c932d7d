#pragma once

#include <string>
#include <vector>

#include "nsplab/fluid_model.hpp"

namespace nsp {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
  std::vector<bool> excluded;  // per input value: nonpositive or non-finite, left out of the fit
};

// OLS of log(value) on log(eps). Needs >= 3 usable values (InvalidArgument otherwise).
// Constant data gives slope 0 and R^2 = 1.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values);

enum class ReportKind {
  Rate,     // strictly decreasing as eps decreases and slope >= floor * predicted
  Decay,    // strictly decreasing only; no exponent claimed
  Bounded,  // max over eps <= bound_factor * value at the largest eps
};

struct RateReport {
  std::string quantity;
  ReportKind kind = ReportKind::Rate;
  std::vector<double> epsilons;
  std::vector<double> means;
  std::vector<double> std_errors;
  std::vector<int> samples;
  std::vector<bool> excluded;
  double predicted_exponent = 0.0;  // NaN for Decay
  double slope = 0.0;               // NaN when fewer than 3 usable values
  double intercept = 0.0;
  double r_squared = 0.0;           // NaN when fewer than 2 usable values
  bool monotone = false;
  bool pass = false;
};

constexpr double kSlopeFloor = 0.8;
constexpr double kBoundFactor = 2.0;

// Builds a report from per-eps samples (one inner vector per eps, NaN entries skipped).
RateReport make_report(const std::string& quantity, ReportKind kind, const std::vector<double>& eps,
                       const std::vector<std::vector<double>>& samples, double predicted_exponent);

// True when values strictly decrease along the (decreasing) eps list.
bool strictly_decreasing(const std::vector<double>& values);

// 1 - (2 + delta) beta
double gradient_part_exponent(const PhysParams& p);
// gamma >= 2: 1 - beta (3 + delta); gamma < 2: gamma - beta/2 - 1.
double electric_term_exponent(const PhysParams& p);

}  // namespace nsp
