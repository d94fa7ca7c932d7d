#include <algorithm>
#include <cmath>

#include "nsplab/errors.hpp"
#include "nsplab/solvers.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

LedgerTerms ledger_terms(const FluidState& s, const VectorField* gdw, const NoiseModel* noise, double dt,
                         const PhysParams& p) {
  (void)dt;
  if (gdw && !noise) throw InvalidArgument("ledger_terms: noise field given without a noise model");
  const auto& g = *s.rho.grid;
  const std::size_t N = g.real_size();
  const double dV = g.cell_volume();
  LedgerTerms t;
  t.energy = energy_components(s, p);
  const auto u = s.velocity();
  const auto uh = spec::forward(u);
  const auto& kd = g.kd();
  std::array<std::vector<double>, 9> du;
  Spectrum tmp(g.spectral_size());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = cplx(0.0, 1.0) * kd[b][i] * uh[a][i];
      du[3 * a + b] = g.inverse(tmp);
    }
  double diss = 0.0, ito = 0.0, mart = 0.0;
  std::vector<double> sq;
  if (gdw) {
    sq.resize(N);
    noise->square_sum_raw(s.rho.values.data(),
                          {s.momentum.comp[0].data(), s.momentum.comp[1].data(), s.momentum.comp[2].data()}, sq.data());
  }
  for (std::size_t i = 0; i < N; ++i) {
    double gu = 0.0;
    for (int e = 0; e < 9; ++e) gu += du[e][i] * du[e][i];
    const double dv = du[0][i] + du[4][i] + du[8][i];
    diss += p.nu1 * gu + (p.nu1 + p.nu2) * dv * dv;
    if (gdw) {
      ito += 0.5 * sq[i] / s.rho[i];
      for (int c = 0; c < 3; ++c) mart += u.comp[c][i] * gdw->comp[c][i];
    }
  }
  t.dissipation_rate = diss * dV;
  t.ito_rate = ito * dV;
  t.martingale = mart * dV;
  return t;
}

void LedgerAccumulator::begin(const EnergyComponents& e0, double t0) {
  ledger_ = EnergyLedger{};
  e0_ = e0.total();
  diss_ = ito_ = mart_ = 0.0;
  ledger_.tolerance = 1e-3 * (e0_ + 1.0);
  ledger_.rows.push_back(LedgerRow{0, t0, e0, 0.0, 0.0, 0.0, 0.0});
}

void LedgerAccumulator::add(const LedgerTerms& t, double dt) {
  diss_ += t.dissipation_rate * dt;
  ito_ += t.ito_rate * dt;
  mart_ += t.martingale;
}

void LedgerAccumulator::row(std::int64_t step, double time, const EnergyComponents& e) {
  if (ledger_.rows.empty()) throw InvalidArgument("LedgerAccumulator: begin() not called");
  const double lhs = e.total() + diss_;
  const double rhs = e0_ + ito_ + mart_;
  ledger_.rows.push_back(LedgerRow{step, time, e, diss_, ito_, mart_, lhs - rhs});
}

EnergyLedger LedgerAccumulator::finish() const {
  EnergyLedger l = ledger_;
  l.max_violation = 0.0;
  l.violation_fraction = 0.0;
  std::size_t bad = 0;
  for (std::size_t n = 1; n < l.rows.size(); ++n) {
    l.max_violation = std::max(l.max_violation, l.rows[n].violation);
    if (l.rows[n].violation > l.tolerance) ++bad;
  }
  if (l.rows.size() > 1) l.violation_fraction = static_cast<double>(bad) / static_cast<double>(l.rows.size() - 1);
  return l;
}

EnergyLedger energy_monitor(const std::vector<FluidState>& states, const std::vector<VectorField>& increments,
                            const std::vector<double>& dts, const NoiseModel* noise, const PhysParams& p) {
  if (states.empty()) throw InvalidArgument("energy_monitor: empty trajectory");
  const std::size_t steps = states.size() - 1;
  if (dts.size() != steps) throw InvalidArgument("energy_monitor: need one dt per step");
  if (noise && increments.size() != steps)
    throw InvalidArgument("energy_monitor: missing noise increments (" + std::to_string(increments.size()) + " of " +
                          std::to_string(steps) + ")");
  if (!noise && !increments.empty()) throw InvalidArgument("energy_monitor: increments given without a noise model");
  LedgerAccumulator acc;
  acc.begin(energy_components(states[0], p), states[0].time);
  for (std::size_t n = 0; n < steps; ++n) {
    acc.add(ledger_terms(states[n], noise ? &increments[n] : nullptr, noise, dts[n], p), dts[n]);
    acc.row(static_cast<std::int64_t>(n + 1), states[n + 1].time, energy_components(states[n + 1], p));
  }
  return acc.finish();
}

}  // namespace nsp
