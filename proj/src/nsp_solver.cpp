#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsplab/errors.hpp"
#include "nsplab/solvers.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

namespace {
const cplx I(0.0, 1.0);

bool is_pow2(int x) { return x > 0 && (x & (x - 1)) == 0; }
}  // namespace

void StepScheme::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("StepScheme: dt must be positive");
  if (!(cfl > 0.0)) throw InvalidArgument("StepScheme: cfl must be positive");
  if (max_retries < 0 || max_retries > 20) throw InvalidArgument("StepScheme: max_retries must lie in 0..20");
}

IncrementSource path_source(const WienerPath& path, std::int64_t first, std::int64_t stride) {
  return [&path, first, stride](int pieces, int piece) {
    if (!is_pow2(pieces)) throw InvalidArgument("path_source: pieces must be a power of two");
    return path.coarse_piece(first, stride, pieces, piece);
  };
}

NspIntegrator::NspIntegrator(const FluidState& initial, const PhysParams& params, const StepScheme& scheme,
                             const NoiseModel* noise)
    : grid_(initial.rho.grid), params_(params), scheme_(scheme), kg_(KGParams::from(params)), noise_(noise) {
  params_.validate();
  scheme_.validate();
  require_finite(initial.rho, "NspIntegrator initial density");
  require_finite(initial.momentum, "NspIntegrator initial momentum");
  if (*std::min_element(initial.rho.values.begin(), initial.rho.values.end()) <= 0.0)
    throw InvalidArgument("NspIntegrator: initial density must be positive");
  if (std::abs(mean(initial.rho) - 1.0) > 1e-10) throw InvalidArgument("NspIntegrator: initial density must have mean 1");
  const auto& g = *grid_;
  std::vector<double> s(g.real_size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = (initial.rho[i] - 1.0) / params_.epsilon;
  sig_ = g.forward(s);
  sig_[0] = 0.0;
  spec::zero_nyquist(g, sig_);
  m_ = spec::forward(initial.momentum);
  for (auto& c : m_) spec::zero_nyquist(g, c);
  time_ = initial.time;
}

struct NspIntegrator::Stage {
  std::array<Spectrum, 3> f;  // momentum forcing
  std::array<Spectrum, 3> G;  // noise increment G dW (when requested)
  double umax = 0.0;
  double dissipation = 0.0;
  double ito = 0.0;
  double martingale = 0.0;
};

double NspIntegrator::admissible_dt() const {
  const auto& g = *grid_;
  double bound = kg_admissible_dt(g, kg_, 0.5);
  const auto u = state().velocity();
  const double umax = lp_norm(u, kInfinity);
  if (umax > 0.0) bound = std::min(bound, scheme_.cfl * g.spacing() / umax);
  return bound;
}

void NspIntegrator::enable_ledger() {
  ledger_on_ = true;
  ledger_ = LedgerAccumulator();
  ledger_.begin(energy_components(state(), params_), time_);
}

FluidState NspIntegrator::state() const {
  const auto& g = *grid_;
  FluidState s{ScalarField(grid_, g.inverse(sig_)), spec::inverse(grid_, m_), ScalarField(grid_), time_, true};
  for (auto& r : s.rho.values) r = 1.0 + params_.epsilon * r;
  s.potential = poisson_solve(s.rho, params_.epsilon, params_.beta);
  return s;
}

const KgPropagator& NspIntegrator::propagator(double dt) {
  if (!prop_ || prop_dt_ != dt) {
    prop_ = std::make_unique<KgPropagator>(*grid_, kg_, dt / kg_.time_scale);
    prop_dt_ = dt;
  }
  return *prop_;
}

StepInfo NspIntegrator::step(const IncrementSource* noise) {
  if (noise && !noise_) throw InvalidArgument("NspIntegrator::step: increments given but no noise model");
  const double dt = scheme_.dt;
  const double adm = kg_admissible_dt(*grid_, kg_, 0.5);
  if (dt > adm * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "nsp step: dt = " << dt << " exceeds the acoustic sampling bound " << adm;
    throw StepRejected(os.str(), adm);
  }
  const auto sig0 = sig_;
  const auto m0 = m_;
  const double t0 = time_;
  const LedgerAccumulator led0 = ledger_;
  for (int r = 0; r <= scheme_.max_retries; ++r) {
    const int pieces = 1 << r;
    bool ok = true;
    for (int k = 0; k < pieces && ok; ++k) {
      WienerIncrement inc;
      if (noise) inc = (*noise)(pieces, k);
      ok = substep(dt / pieces, noise ? &inc : nullptr, r == 0 && k == 0);
    }
    if (ok) {
      time_ = t0 + dt;
      ++steps_;
      if (ledger_on_) ledger_.row(steps_, time_, energy_components(state(), params_));
      return StepInfo{dt, pieces};
    }
    sig_ = sig0;
    m_ = m0;
    time_ = t0;
    ledger_ = led0;
  }
  std::ostringstream os;
  os << "nsp step: density positivity lost at t = " << t0 << " after " << scheme_.max_retries << " retries";
  throw PathAborted(os.str());
}

bool NspIntegrator::evaluate(const Spectrum& sig, const std::array<Spectrum, 3>& mh, const WienerIncrement* inc,
                             Stage& out) const {
  const auto& g = *grid_;
  const std::size_t N = g.real_size(), S = g.spectral_size();
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  const auto& x2 = g.xi_sq();
  const double eps = params_.epsilon, eb = kg_.eps_beta;
  const double nu1 = params_.nu1, nu2 = params_.nu2;

  const auto sr = g.inverse(sig);
  std::vector<double> rho(N);
  double rmin = 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    rho[i] = 1.0 + eps * sr[i];
    rmin = std::min(rmin, rho[i]);
  }
  if (!(rmin > 0.0)) return false;
  std::array<std::vector<double>, 3> m, u;
  std::array<Spectrum, 3> uh;
  out.umax = 0.0;
  for (int c = 0; c < 3; ++c) {
    m[c] = g.inverse(mh[c]);
    u[c].resize(N);
    for (std::size_t i = 0; i < N; ++i) u[c][i] = m[c][i] / rho[i];
    uh[c] = g.forward(u[c]);
  }
  for (std::size_t i = 0; i < N; ++i)
    out.umax = std::max(out.umax, std::sqrt(u[0][i] * u[0][i] + u[1][i] * u[1][i] + u[2][i] * u[2][i]));
  if (!std::isfinite(out.umax)) return false;
  Spectrum tmp(S);
  std::array<std::vector<double>, 9> du;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < S; ++i) tmp[i] = I * kd[b][i] * uh[a][i];
      du[3 * a + b] = g.inverse(tmp);
    }
  for (std::size_t i = 0; i < S; ++i) tmp[i] = I * (kd[0][i] * mh[0][i] + kd[1][i] * mh[1][i] + kd[2][i] * mh[2][i]);
  const auto divm = g.inverse(tmp);
  // w = grad inv-Lap sigma; eps^-2 (rho - 1) grad V = eps^-beta sigma w
  std::array<std::vector<double>, 3> w;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < S; ++i) tmp[i] = x2[i] > 0.0 ? -I * kd[c][i] * sig[i] / x2[i] : cplx(0.0);
    w[c] = g.inverse(tmp);
  }

  auto& f = out.f;
  for (auto& c : f) c.assign(S, 0.0);
  std::vector<double> work(N);
  // convection 1/2 [div(m (x) u) + rho (u.grad) u + u div m]; m (x) u is symmetric
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      for (std::size_t i = 0; i < N; ++i) work[i] = m[a][i] * u[b][i];
      const auto P = g.forward(work);
      for (std::size_t i = 0; i < S; ++i) {
        f[a][i] -= 0.5 * I * kd[b][i] * P[i];
        if (b != a) f[b][i] -= 0.5 * I * kd[a][i] * P[i];
      }
    }
  for (int a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < N; ++i)
      work[i] = 0.5 * (rho[i] * (u[0][i] * du[3 * a][i] + u[1][i] * du[3 * a + 1][i] + u[2][i] * du[3 * a + 2][i]) +
                       u[a][i] * divm[i]) -
                sr[i] * w[a][i] / eb;
    const auto C = g.forward(work);
    for (std::size_t i = 0; i < S; ++i) f[a][i] -= C[i];
  }
  // pressure remainder eps^-2 (gamma - 1) H
  for (std::size_t i = 0; i < N; ++i)
    work[i] = (params_.gamma - 1.0) * relative_energy_point(rho[i], params_.gamma, params_.pressure_coeff) / (eps * eps);
  {
    const auto P = g.forward(work);
    for (int a = 0; a < 3; ++a)
      for (std::size_t i = 0; i < S; ++i) f[a][i] -= I * kd[a][i] * P[i];
  }
  if (scheme_.dealias)
    for (auto& c : f) spec::apply_mask(g, c);
  for (std::size_t i = 0; i < S; ++i) {
    const cplx kdu = kd[0][i] * uh[0][i] + kd[1][i] * uh[1][i] + kd[2][i] * uh[2][i];
    for (int a = 0; a < 3; ++a) f[a][i] += -nu1 * k2[i] * uh[a][i] - (nu1 + nu2) * kd[a][i] * kdu;
  }

  const double dV = g.cell_volume();
  double diss = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double gu = 0.0;
    for (int e = 0; e < 9; ++e) gu += du[e][i] * du[e][i];
    const double dv = du[0][i] + du[4][i] + du[8][i];
    diss += nu1 * gu + (nu1 + nu2) * dv * dv;
  }
  out.dissipation = diss * dV;
  out.ito = out.martingale = 0.0;
  if (inc) {
    std::array<std::vector<double>, 3> gr;
    for (auto& c : gr) c.resize(N);
    const std::array<const double*, 3> mp{m[0].data(), m[1].data(), m[2].data()};
    noise_->apply_raw(rho.data(), mp, inc->dbeta, {gr[0].data(), gr[1].data(), gr[2].data()});
    for (int c = 0; c < 3; ++c) out.G[c] = g.forward(gr[c]);
    if (ledger_on_) {
      std::vector<double> sq(N);
      noise_->square_sum_raw(rho.data(), mp, sq.data());
      double ito = 0.0, mart = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        ito += 0.5 * sq[i] / rho[i];
        mart += u[0][i] * gr[0][i] + u[1][i] * gr[1][i] + u[2][i] * gr[2][i];
      }
      out.ito = ito * dV;
      out.martingale = mart * dV;
    }
  }
  return true;
}

namespace {
// v -> (longitudinal coefficient, remainder)
void split(const SpectralGrid& g, std::array<Spectrum, 3>& v, std::vector<cplx>& q) {
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  q = longitudinal_component(g, v);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (k2[i] == 0.0) continue;
    const double inv = 1.0 / std::sqrt(k2[i]);
    for (int a = 0; a < 3; ++a) v[a][i] -= kd[a][i] * inv * q[i];
  }
}

void join(const SpectralGrid& g, const std::array<Spectrum, 3>& p, const std::vector<cplx>& q, std::array<Spectrum, 3>& v) {
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double inv = k2[i] > 0.0 ? 1.0 / std::sqrt(k2[i]) : 0.0;
    for (int a = 0; a < 3; ++a) v[a][i] = p[a][i] + kd[a][i] * inv * q[i];
  }
  for (auto& c : v) spec::zero_nyquist(g, c);
}
}  // namespace

bool NspIntegrator::substep(double dt, const WienerIncrement* inc, bool first) {
  const auto& g = *grid_;
  const std::size_t S = g.spectral_size();
  const auto& k2 = g.kd_sq();
  const double nu1 = params_.nu1;
  Stage s0;
  if (!evaluate(sig_, m_, inc, s0)) return false;
  if (first && s0.umax * dt > scheme_.cfl * g.spacing()) {
    std::ostringstream os;
    os << "nsp step: CFL violated, max|u| dt/h = " << s0.umax * dt / g.spacing();
    throw StepRejected(os.str(), scheme_.cfl * g.spacing() / s0.umax);
  }

  std::array<Spectrum, 3> mP = m_;
  std::vector<cplx> q, fq0, gq;
  split(g, mP, q);
  split(g, s0.f, fq0);
  if (inc) split(g, s0.G, gq);
  const bool has_noise = inc != nullptr;
  double dissipation = s0.dissipation;

  if (scheme_.splitting == Splitting::FullyExplicit) {
    const double tf = dt / kg_.time_scale;
    const double eb = kg_.eps_beta;
    for (std::size_t i = 0; i < S; ++i) {
      if (k2[i] > 0.0) {
        const double k = std::sqrt(k2[i]);
        const double a = eb * k, b = kg_.gamma * eb * k + 1.0 / k;
        q[i] += dt * fq0[i] - I * b * tf * sig_[i];
        if (has_noise) q[i] += gq[i];
        sig_[i] -= I * a * tf * q[i];
      }
      for (int a = 0; a < 3; ++a) {
        mP[a][i] += dt * s0.f[a][i];
        if (has_noise) mP[a][i] += s0.G[a][i];
      }
    }
  } else {
    // integrating-factor Heun: exact acoustic rotation and viscous decay of the solenoidal
    // part, explicit trapezoid for the rest, noise at the left point
    const auto& Sg = propagator(dt);
    std::vector<double> decay(S);
    for (std::size_t i = 0; i < S; ++i) decay[i] = std::exp(-nu1 * k2[i] * dt);
    // stage 1
    Spectrum sig1 = sig_;
    std::vector<cplx> q1 = q;
    std::array<Spectrum, 3> mP1 = mP;
    for (std::size_t i = 0; i < S; ++i) {
      const double lam = nu1 * k2[i];
      q1[i] += dt * fq0[i] + (has_noise ? gq[i] : cplx(0.0));
      for (int a = 0; a < 3; ++a) {
        cplx v = mP[a][i] + dt * (s0.f[a][i] + lam * mP[a][i]);
        if (has_noise) v += s0.G[a][i];
        mP1[a][i] = decay[i] * v;
      }
    }
    Sg.apply(sig1, q1);
    std::array<Spectrum, 3> m1;
    for (auto& c : m1) c.resize(S);
    join(g, mP1, q1, m1);
    spec::zero_nyquist(g, sig1);
    Stage s1;
    if (!evaluate(sig1, m1, nullptr, s1)) return false;
    std::vector<cplx> fq1;
    split(g, s1.f, fq1);
    dissipation = 0.5 * (s0.dissipation + s1.dissipation);
    // stage 2
    for (std::size_t i = 0; i < S; ++i) {
      const double lam = nu1 * k2[i];
      q[i] += 0.5 * dt * fq0[i] + (has_noise ? gq[i] : cplx(0.0));
      for (int a = 0; a < 3; ++a) {
        cplx v = mP[a][i] + 0.5 * dt * (s0.f[a][i] + lam * mP[a][i]);
        if (has_noise) v += s0.G[a][i];
        mP[a][i] = decay[i] * v + 0.5 * dt * (s1.f[a][i] + lam * mP1[a][i]);
      }
    }
    Sg.apply(sig_, q);
    for (std::size_t i = 0; i < S; ++i) q[i] += 0.5 * dt * fq1[i];
  }
  join(g, mP, q, m_);
  spec::zero_nyquist(g, sig_);
  time_ += dt;
  if (ledger_on_) {
    LedgerTerms t;
    t.dissipation_rate = dissipation;
    t.ito_rate = s0.ito;
    t.martingale = s0.martingale;
    ledger_.add(t, dt);
  }
  const auto sr = g.inverse(sig_);
  const double smin = *std::min_element(sr.begin(), sr.end());
  return std::isfinite(smin) && 1.0 + params_.epsilon * smin > 0.0;
}

FluidState nsp_step(const FluidState& s, const PhysParams& p, const StepScheme& scheme, const NoiseModel* noise,
                    const WienerPath* path, std::int64_t step_index) {
  NspIntegrator it(s, p, scheme, noise);
  if (path) {
    const auto src = path_source(*path, step_index, 1);
    it.step(&src);
  } else {
    it.step(nullptr);
  }
  return it.state();
}

}  // namespace nsp
