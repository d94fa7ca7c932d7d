#include <cmath>
#include <numbers>

#include "nsplab/errors.hpp"
#include "nsplab/harness.hpp"
#include "nsplab/random.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

namespace {

// Spectrum of sum_b s_b G_l(x - c_b), G_l the periodized Gaussian of width l; zero mean.
Spectrum bump_field(const SpectralGrid& g, double width, int bumps, std::uint64_t seed) {
  const double L = g.box_length();
  std::vector<Vec3> centers(bumps);
  std::vector<double> signs(bumps);
  for (int b = 0; b < bumps; ++b) {
    const auto u = rng::uniform_pair(seed, 2 * b, 0);
    const auto v = rng::uniform_pair(seed, 2 * b + 1, 0);
    centers[b] = {u[0] * L, u[1] * L, v[0] * L};
    signs[b] = v[1] < 0.5 ? -1.0 : 1.0;
  }
  const double amp = std::pow(2.0 * std::numbers::pi * width * width, 1.5) / g.volume();
  Spectrum f(g.spectral_size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g.xi_sq()[i] == 0.0) continue;
    const auto xi = g.wavevector(i);
    cplx s = 0.0;
    for (int b = 0; b < bumps; ++b) {
      const double ph = xi[0] * centers[b][0] + xi[1] * centers[b][1] + xi[2] * centers[b][2];
      s += signs[b] * std::polar(1.0, -ph);
    }
    f[i] = amp * std::exp(-0.5 * width * width * g.xi_sq()[i]) * s;
  }
  spec::zero_nyquist(g, f);
  return f;
}

double lp(const std::vector<double>& v, double p, double dV) {
  double s = 0.0;
  if (p == 2.0) {
    for (double x : v) s += x * x;
  } else if (p == 6.0) {
    for (double x : v) {
      const double x2 = x * x;
      s += x2 * x2 * x2;
    }
  } else {
    for (double x : v) s += std::pow(std::abs(x), p);
  }
  return std::pow(s * dV, 1.0 / p);
}

}  // namespace

std::vector<MollifierScaling> mollifier_scaling_study(const MollifierStudyOptions& opt) {
  if (opt.kappa_points < 3 || opt.widths < 2 || opt.bumps < 1) throw InvalidArgument("mollifier study: bad options");
  for (double p : opt.ps)
    if (!(p >= 2.0 && p <= 6.0)) throw InvalidArgument("mollifier study: p must lie in [2, 6]");
  const auto g = SpectralGrid::create(opt.n, opt.L);
  const double h = g->spacing();
  const double k_lo = 4.0 * h, k_hi = opt.L / 8.0;
  if (!(k_lo < k_hi)) throw InvalidArgument("mollifier study: grid too coarse for the kappa window");
  std::vector<double> kappas;
  for (int j = 0; j < opt.kappa_points; ++j)
    kappas.push_back(k_lo * std::pow(k_hi / k_lo, double(j) / (opt.kappa_points - 1)));
  const double w_lo = 1.5 * h, w_hi = opt.L / 4.0;

  std::vector<MollifierScaling> out(opt.ps.size());
  for (std::size_t q = 0; q < opt.ps.size(); ++q) {
    out[q].p = opt.ps[q];
    out[q].predicted = 1.0 - 3.0 * (0.5 - 1.0 / opt.ps[q]);
    out[q].kappas = kappas;
    out[q].ratios.assign(kappas.size(), 0.0);
  }
  std::vector<double> real(g->real_size());
  Spectrum hp(g->spectral_size());
  for (int w = 0; w < opt.widths; ++w) {
    const double width = w_lo * std::pow(w_hi / w_lo, double(w) / (opt.widths - 1));
    const auto f = bump_field(*g, width, opt.bumps, rng::mix(opt.seed, std::uint64_t(w)));
    double grad2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) grad2 += g->weight()[i] * g->xi_sq()[i] * std::norm(f[i]);
    const double grad = std::sqrt(grad2 * g->volume());
    for (std::size_t j = 0; j < kappas.size(); ++j) {
      for (std::size_t i = 0; i < f.size(); ++i) hp[i] = (1.0 - gaussian_symbol(kappas[j], g->xi_sq()[i])) * f[i];
      g->inverse(hp, real);
      for (auto& r : out) r.ratios[j] = std::max(r.ratios[j], lp(real, r.p, g->cell_volume()) / grad);
    }
  }
  for (auto& r : out) {
    const auto fit = fit_rate(r.kappas, r.ratios);
    r.slope = fit.slope;
    r.r_squared = fit.r_squared;
    r.pass = std::abs(r.slope - r.predicted) <= opt.tolerance * std::max(1.0, std::abs(r.predicted));
  }
  return out;
}

}  // namespace nsp
