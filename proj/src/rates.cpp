#include "nsplab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsplab/errors.hpp"

namespace nsp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Ols {
  double slope, intercept, r2;
};

Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_rate: eps values must not all coincide");
  const double slope = sxy / sxx;
  const double ssr = std::max(0.0, syy - slope * sxy);
  const double r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return {slope, my - slope * mx, r2};
}
}  // namespace

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size()) throw InvalidArgument("fit_rate: size mismatch");
  RateFit f;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InvalidArgument("fit_rate: eps must be positive");
    const bool bad = !(values[i] > 0.0) || !std::isfinite(values[i]);
    f.excluded.push_back(bad);
    if (bad) continue;
    x.push_back(std::log(eps[i]));
    y.push_back(std::log(values[i]));
  }
  f.points = int(x.size());
  if (f.points < 3) throw InvalidArgument("fit_rate: needs at least 3 positive values");
  const auto o = ols(x, y);
  f.slope = o.slope;
  f.intercept = o.intercept;
  f.r_squared = o.r2;
  return f;
}

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

RateReport make_report(const std::string& quantity, ReportKind kind, const std::vector<double>& eps,
                       const std::vector<std::vector<double>>& samples, double predicted_exponent) {
  if (eps.size() != samples.size()) throw InvalidArgument("make_report: size mismatch");
  RateReport r;
  r.quantity = quantity;
  r.kind = kind;
  r.epsilons = eps;
  r.predicted_exponent = kind == ReportKind::Decay ? kNaN : predicted_exponent;
  for (const auto& s : samples) {
    double sum = 0.0;
    int m = 0;
    for (double v : s)
      if (std::isfinite(v)) sum += v, ++m;
    const double mean = m > 0 ? sum / m : kNaN;
    double ss = 0.0;
    for (double v : s)
      if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    r.means.push_back(mean);
    r.std_errors.push_back(m > 1 ? std::sqrt(ss / (m - 1) / m) : kNaN);
    r.samples.push_back(m);
  }

  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const bool bad = !(r.means[i] > 0.0) || !std::isfinite(r.means[i]);
    r.excluded.push_back(bad);
    if (!bad) x.push_back(std::log(eps[i])), y.push_back(std::log(r.means[i]));
  }
  r.slope = r.intercept = r.r_squared = kNaN;
  if (x.size() >= 2) {
    const auto o = ols(x, y);
    r.r_squared = o.r2;
    if (x.size() >= 3) r.slope = o.slope, r.intercept = o.intercept;
  }
  r.monotone = strictly_decreasing(r.means);

  switch (kind) {
    case ReportKind::Rate:
      r.pass = r.monotone && std::isfinite(r.slope) && r.slope >= kSlopeFloor * predicted_exponent;
      break;
    case ReportKind::Decay:
      r.pass = r.monotone;
      break;
    case ReportKind::Bounded: {
      bool ok = !r.means.empty() && std::isfinite(r.means.front());
      for (double m : r.means) ok = ok && std::isfinite(m) && m <= kBoundFactor * r.means.front();
      r.pass = ok;
      break;
    }
  }
  return r;
}

double gradient_part_exponent(const PhysParams& p) { return 1.0 - (2.0 + p.delta_slack) * p.beta; }

double electric_term_exponent(const PhysParams& p) {
  if (p.gamma >= 2.0) return 1.0 - p.beta * (3.0 + p.delta_slack);
  return p.gamma - p.beta / 2.0 - 1.0;
}

}  // namespace nsp
