#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsplab/acoustic.hpp"
#include "nsplab/harness.hpp"

namespace nsp {

namespace {

// sigma' = -i a q, q' = -i b sigma with classical RK4.
std::pair<cplx, cplx> rk4_mode(cplx s, cplx q, double k, const KGParams& p, double t, int steps) {
  const cplx I(0, 1);
  const double a = p.eps_beta * k, b = p.gamma * p.eps_beta * k + 1.0 / k;
  const double h = t / steps;
  auto f = [&](cplx x, cplx y) { return std::pair<cplx, cplx>{-I * a * y, -I * b * x}; };
  for (int n = 0; n < steps; ++n) {
    auto [k1s, k1q] = f(s, q);
    auto [k2s, k2q] = f(s + 0.5 * h * k1s, q + 0.5 * h * k1q);
    auto [k3s, k3q] = f(s + 0.5 * h * k2s, q + 0.5 * h * k2q);
    auto [k4s, k4q] = f(s + h * k3s, q + h * k3q);
    s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  }
  return {s, q};
}

double rel_diff(const AcousticState& a, const AcousticState& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.sigma.size(); ++i) {
    num += std::pow(a.sigma[i] - b.sigma[i], 2);
    den += std::pow(a.sigma[i], 2);
    for (int c = 0; c < 3; ++c) {
      num += std::pow(a.grad_psi.comp[c][i] - b.grad_psi.comp[c][i], 2);
      den += std::pow(a.grad_psi.comp[c][i], 2);
    }
  }
  return std::sqrt(num / den);
}

CheckResult at_most(const std::string& name, double v, double thr) { return {name, v, thr, v <= thr}; }

}  // namespace

std::vector<CheckResult> kg_exactness_checks(int n) {
  const auto g = SpectralGrid::create(n, 2.0 * std::numbers::pi);
  std::vector<CheckResult> out;

  const KGParams p{std::pow(0.05, 0.2), 2.0, 1.0};
  const double t = 3.7;
  const auto s0 = random_acoustic_state(g, 3, std::max(1, n / 4));
  std::vector<cplx> s0h, q0h, sth, qth;
  acoustic_to_spectral(s0, s0h, q0h);
  acoustic_to_spectral(kg_homogeneous_propagate(s0, p, t), sth, qth);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < s0h.size(); ++i) {
    const double k2 = g->kd_sq()[i];
    if (k2 == 0.0 || std::abs(s0h[i]) + std::abs(q0h[i]) == 0.0) continue;
    const auto [a, b] = rk4_mode(s0h[i], q0h[i], std::sqrt(k2), p, t, 4000);
    worst = std::max({worst, std::abs(a - sth[i]), std::abs(b - qth[i])});
    scale = std::max({scale, std::abs(s0h[i]), std::abs(q0h[i])});
  }
  out.push_back(at_most("propagator vs RK4 oracle (relative)", worst / scale, 1e-6));

  double group = 0.0, energy = 0.0;
  for (double eb : {1.0, 0.5, 0.1}) {
    const KGParams q{eb, 5.0 / 3.0, 1.0};
    const auto s = random_acoustic_state(g, 8, std::max(1, n / 3 - 1));
    const auto ab = kg_homogeneous_propagate(kg_homogeneous_propagate(s, q, 1.3), q, 2.9);
    const auto c = kg_homogeneous_propagate(s, q, 4.2);
    group = std::max(group, rel_diff(c, ab));
    const auto e0 = kg_mode_energies(s, q), e1 = kg_mode_energies(c, q);
    const double emax = *std::max_element(e0.begin(), e0.end());
    for (std::size_t i = 0; i < e0.size(); ++i)
      energy = std::max(energy, std::abs(e0[i] - e1[i]) / std::max(e0[i], 1e-6 * emax));
  }
  out.push_back(at_most("group property S(a)S(b) = S(a+b)", group, 1e-10));
  out.push_back(at_most("per-mode energy conservation", energy, 1e-10));

  const KGParams r{0.6, 2.0, 1.0};
  const auto sr = random_acoustic_state(g, 21, 3);
  std::vector<double> res;
  for (double dt : {0.1, 0.05, 0.025}) {
    std::vector<ScalarField> traj;
    for (int j = -1; j <= 1; ++j) traj.push_back(kg_homogeneous_propagate(sr, r, 1.0 + j * dt).sigma);
    res.push_back(kg_second_order_residual(traj, dt, r));
  }
  const double order = std::log2(res[1] / res[2]);
  out.push_back({"second-order residual Richardson order", order, 1.9, order >= 1.9});
  return out;
}

std::vector<CheckResult> kg_beta0_checks(int n) {
  const auto g = SpectralGrid::create(n, 2.0 * std::numbers::pi);
  const std::vector<double> eps{1.0, 0.1, 0.01};
  double amp_spread = 0.0, state_spread = 0.0;
  for (double gamma : {1.6, 2.0, 3.0}) {
    std::vector<KGParams> ps;
    for (double e : eps) {
      PhysParams pp;
      pp.regime = Regime::ZeroElectronMass;
      pp.beta = 0.0;
      pp.epsilon = e;
      pp.gamma = gamma;
      ps.push_back(KGParams::from(pp));
    }
    for (std::size_t i = 0; i < g->spectral_size(); ++i) {
      const double x2 = g->xi_sq()[i];
      if (x2 == 0.0) continue;
      for (auto f : {kg_transfer_sigma_to_grad, kg_transfer_grad_to_sigma}) {
        double lo = kInfinity, hi = 0.0;
        for (const auto& p : ps) lo = std::min(lo, f(x2, p)), hi = std::max(hi, f(x2, p));
        amp_spread = std::max(amp_spread, (hi - lo) / lo);
      }
    }
    const auto s0 = random_acoustic_state(g, 5, 4);
    const auto ref = kg_homogeneous_propagate(s0, ps[0], 2.5);
    for (std::size_t k = 1; k < ps.size(); ++k)
      state_spread = std::max(state_spread, rel_diff(ref, kg_homogeneous_propagate(s0, ps[k], 2.5)));
  }
  return {at_most("beta = 0 transfer amplitude spread over eps", amp_spread, 1e-10),
          at_most("beta = 0 propagated state spread over eps (fast time)", state_spread, 1e-10)};
}

}  // namespace nsp
