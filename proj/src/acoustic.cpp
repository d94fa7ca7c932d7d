#include "nsplab/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nsplab/errors.hpp"
#include "nsplab/random.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

namespace {
const cplx I(0.0, 1.0);

void validate_state(const AcousticState& s) {
  require_finite(s.sigma, "acoustic state");
  require_finite(s.grad_psi, "acoustic state");
  const double sm = std::abs(mean(s.sigma));
  if (sm > 1e-12 * std::max(1.0, lp_norm(s.sigma, kInfinity)))
    throw InvalidArgument("acoustic state: sigma must have zero mean, mean = " + std::to_string(sm));
}
}  // namespace

KGParams KGParams::from(const PhysParams& p) {
  KGParams k;
  k.eps_beta = p.eps_beta();
  k.gamma = p.sound_gamma();
  k.time_scale = p.epsilon * k.eps_beta;
  return k;
}

void KGParams::validate() const {
  if (!(eps_beta > 0.0 && eps_beta <= 1.0)) throw InvalidArgument("KGParams: eps_beta must lie in (0,1]");
  if (!(gamma > 1.5)) throw InvalidArgument("KGParams: gamma must exceed 3/2");
  if (!(time_scale > 0.0)) throw InvalidArgument("KGParams: time_scale must be positive");
}

double kg_multiplier_m(double xi_sq, const KGParams& p) {
  if (!(xi_sq >= 0.0)) throw InvalidArgument("kg_multiplier_m: xi_sq must be >= 0");
  return p.eps_beta * xi_sq / (1.0 + p.gamma * p.eps_beta * xi_sq);
}

double kg_multiplier_n(double xi_sq, const KGParams& p) {
  if (!(xi_sq > 0.0)) throw InvalidArgument("kg_multiplier_n: singular at xi = 0");
  return (1.0 + p.gamma * p.eps_beta * xi_sq) / xi_sq;
}

double kg_frequency(double xi_sq, const KGParams& p) {
  if (!(xi_sq >= 0.0)) throw InvalidArgument("kg_frequency: xi_sq must be >= 0");
  return std::sqrt(p.eps_beta * (1.0 + p.gamma * p.eps_beta * xi_sq));
}

double kg_transfer_sigma_to_grad(double xi_sq, const KGParams& p) {
  if (!(xi_sq > 0.0)) throw InvalidArgument("kg_transfer: singular at xi = 0");
  return std::sqrt(p.gamma + 1.0 / (p.eps_beta * xi_sq));
}

double kg_transfer_grad_to_sigma(double xi_sq, const KGParams& p) { return 1.0 / kg_transfer_sigma_to_grad(xi_sq, p); }

KgPropagator::KgPropagator(const SpectralGrid& g, const KGParams& p, double tau) : tau_(tau) {
  p.validate();
  const std::size_t S = g.spectral_size();
  rot_.resize(S);
  sb_.resize(S);
  sa_.resize(S);
  const auto& k2 = g.kd_sq();
  for (std::size_t i = 0; i < S; ++i) {
    if (k2[i] == 0.0) {
      rot_[i] = 1.0;
      sb_[i] = sa_[i] = 0.0;
      continue;
    }
    const double k = std::sqrt(k2[i]);
    const double a = p.eps_beta * k;
    const double b = p.gamma * p.eps_beta * k + 1.0 / k;
    const double w = kg_frequency(k2[i], p);
    rot_[i] = std::polar(1.0, -w * tau);
    sa_[i] = std::sqrt(a);
    sb_[i] = std::sqrt(b);
  }
}

void KgPropagator::apply(std::vector<cplx>& sigma, std::vector<cplx>& q) const {
  for (std::size_t i = 0; i < rot_.size(); ++i) {
    if (sb_[i] == 0.0) continue;
    // w+ = sqrt(b) sigma + sqrt(a) q rotates by exp(-i w t), w- by exp(+i w t)
    const cplx wp = (sb_[i] * sigma[i] + sa_[i] * q[i]) * rot_[i];
    const cplx wm = (sb_[i] * sigma[i] - sa_[i] * q[i]) * std::conj(rot_[i]);
    sigma[i] = 0.5 * (wp + wm) / sb_[i];
    q[i] = 0.5 * (wp - wm) / sa_[i];
  }
}

double kg_omega_max(const SpectralGrid& g, const KGParams& p) {
  const double kmax = *std::max_element(g.kd_sq().begin(), g.kd_sq().end());
  return kg_frequency(kmax, p);
}

double kg_admissible_dt(const SpectralGrid& g, const KGParams& p, double c) {
  return c * p.time_scale / kg_omega_max(g, p);
}

std::vector<cplx> longitudinal_component(const SpectralGrid& g, const std::array<Spectrum, 3>& v) {
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  std::vector<cplx> q(g.spectral_size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (k2[i] > 0.0) q[i] = (kd[0][i] * v[0][i] + kd[1][i] * v[1][i] + kd[2][i] * v[2][i]) / std::sqrt(k2[i]);
  return q;
}

void acoustic_to_spectral(const AcousticState& s, std::vector<cplx>& sigma, std::vector<cplx>& q) {
  const auto& g = *s.sigma.grid;
  sigma = g.forward(s.sigma.values);
  const auto gh = spec::forward(s.grad_psi);
  q = longitudinal_component(g, gh);
  // purity of the gradient
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  double tot = 0.0, perp = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double w = g.weight()[i];
    const double inv = k2[i] > 0.0 ? 1.0 / std::sqrt(k2[i]) : 0.0;
    for (int c = 0; c < 3; ++c) {
      tot += w * std::norm(gh[c][i]);
      perp += w * std::norm(gh[c][i] - kd[c][i] * inv * q[i]);
    }
  }
  if (std::sqrt(perp) > 1e-10 * std::sqrt(tot)) throw InvalidArgument("acoustic state: grad_psi is not a pure gradient");
}

AcousticState acoustic_from_spectral(GridPtr gp, const std::vector<cplx>& sigma, const std::vector<cplx>& q, double time) {
  const auto& g = *gp;
  AcousticState s{ScalarField(gp, g.inverse(sigma)), VectorField(gp), time};
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  Spectrum c(g.spectral_size());
  for (int d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = k2[i] > 0.0 ? kd[d][i] / std::sqrt(k2[i]) * q[i] : cplx(0.0);
    g.inverse(c, s.grad_psi.comp[d]);
  }
  return s;
}

AcousticState kg_homogeneous_propagate(const AcousticState& s, const KGParams& p, double t) {
  validate_state(s);
  std::vector<cplx> sig, q;
  acoustic_to_spectral(s, sig, q);
  KgPropagator S(*s.sigma.grid, p, t);
  S.apply(sig, q);
  return acoustic_from_spectral(s.sigma.grid, sig, q, s.time + t * p.time_scale);
}

std::vector<double> kg_mode_energies(const AcousticState& s, const KGParams& p) {
  std::vector<cplx> sig, q;
  acoustic_to_spectral(s, sig, q);
  const auto& k2 = s.sigma.grid->kd_sq();
  std::vector<double> e(sig.size(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i)
    if (k2[i] > 0.0) e[i] = (p.gamma * p.eps_beta + 1.0 / k2[i]) * std::norm(sig[i]) + p.eps_beta * std::norm(q[i]);
  return e;
}

double kg_total_energy(const AcousticState& s, const KGParams& p) {
  const auto e = kg_mode_energies(s, p);
  const auto& w = s.sigma.grid->weight();
  double t = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) t += w[i] * e[i];
  return t * s.sigma.grid->volume();
}

double kg_second_order_residual(const std::vector<ScalarField>& samples, double dt, const KGParams& p) {
  if (samples.size() < 3) throw InvalidArgument("kg_second_order_residual: need at least 3 time samples");
  if (!(dt > 0.0)) throw InvalidArgument("kg_second_order_residual: dt must be positive");
  const auto& g = *samples.front().grid;
  std::vector<Spectrum> sp;
  sp.reserve(samples.size());
  for (const auto& s : samples) sp.push_back(g.forward(s.values));
  const auto& k2 = g.kd_sq();
  double worst = 0.0;
  Spectrum r(g.spectral_size());
  for (std::size_t j = 1; j + 1 < sp.size(); ++j) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double w2 = k2[i] > 0.0 ? p.eps_beta * (1.0 + p.gamma * p.eps_beta * k2[i]) : 0.0;
      r[i] = k2[i] > 0.0 ? (sp[j + 1][i] - 2.0 * sp[j][i] + sp[j - 1][i]) / (dt * dt) + w2 * sp[j][i] : cplx(0.0);
    }
    worst = std::max(worst, std::sqrt(g.spectral_inner(r, r)));
  }
  return worst;
}

void kg_duhamel_spectral(const KgPropagator& S, std::vector<cplx>& sigma, std::vector<cplx>& q, const std::vector<cplx>& fq,
                         const std::vector<cplx>& gq, double dt) {
  if (!fq.empty())
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += dt * fq[i];
  if (!gq.empty())
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += gq[i];
  S.apply(sigma, q);
}

namespace {
void check_dt(const SpectralGrid& g, const KGParams& p, double dt) {
  const double adm = kg_admissible_dt(g, p, 0.5);
  if (!(dt > 0.0) || dt > adm * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "kg_duhamel_step: dt = " << dt << " does not resolve the fast scale; admissible dt <= " << adm;
    throw StepRejected(os.str(), adm);
  }
}
}  // namespace

AcousticState kg_duhamel_step(const AcousticState& s, const VectorField& forcing, const VectorField* noise_increment,
                              const KGParams& p, double dt) {
  validate_state(s);
  require_finite(forcing, "kg_duhamel_step forcing");
  const auto& g = *s.sigma.grid;
  check_dt(g, p, dt);
  std::vector<cplx> sig, q;
  acoustic_to_spectral(s, sig, q);
  const auto fq = longitudinal_component(g, spec::forward(forcing));
  std::vector<cplx> gq;
  if (noise_increment) {
    require_finite(*noise_increment, "kg_duhamel_step noise");
    gq = longitudinal_component(g, spec::forward(*noise_increment));
  }
  KgPropagator S(g, p, dt / p.time_scale);
  kg_duhamel_spectral(S, sig, q, fq, gq, dt);
  return acoustic_from_spectral(s.sigma.grid, sig, q, s.time + dt);
}

AcousticState kg_duhamel_step(const AcousticState& s, const ForcingTensors& F, const VectorField* noise_increment,
                              const KGParams& p, double dt) {
  const auto gp = s.sigma.grid;
  const auto& g = *gp;
  const auto& kd = g.kd();
  std::array<Spectrum, 3> f;
  for (auto& c : f) c.assign(g.spectral_size(), 0.0);
  std::vector<double> work(g.real_size());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < work.size(); ++i) work[i] = F.F1_tensor.at(a, b)[i] + F.F2_tensor.at(a, b)[i];
      const Spectrum t = g.forward(work);
      for (std::size_t i = 0; i < t.size(); ++i) f[a][i] -= I * kd[b][i] * t[i];
    }
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = F.F1_scalar[i] + F.F2_scalar[i];
  const Spectrum sc = g.forward(work);
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < sc.size(); ++i) f[a][i] -= I * kd[a][i] * sc[i];
  return kg_duhamel_step(s, spec::inverse(gp, f), noise_increment, p, dt);
}

StrichartzReport strichartz_l2_check(const std::vector<AcousticState>& batch, const KGParams& p, double t_final, int samples) {
  if (batch.size() < 8) throw InvalidArgument("strichartz_l2_check: need a batch of at least 8 states");
  if (samples < 2 || !(t_final > 0.0)) throw InvalidArgument("strichartz_l2_check: bad time sampling");
  StrichartzReport rep;
  rep.batch = static_cast<int>(batch.size());
  for (const auto& s0 : batch) {
    validate_state(s0);
    const auto& g = *s0.sigma.grid;
    std::vector<cplx> sig0, q0;
    acoustic_to_spectral(s0, sig0, q0);
    const double n0 = std::sqrt(g.spectral_inner(sig0, sig0)) + std::sqrt(g.spectral_inner(q0, q0));
    if (n0 == 0.0) continue;
    double ms = 0.0, mq = 0.0;
    for (int j = 0; j <= samples; ++j) {
      const double t = t_final * j / samples;
      auto sig = sig0, q = q0;
      KgPropagator(g, p, t).apply(sig, q);
      ms = std::max(ms, std::sqrt(g.spectral_inner(sig, sig)));
      mq = std::max(mq, std::sqrt(g.spectral_inner(q, q)));
    }
    rep.sigma_constant = std::max(rep.sigma_constant, ms / n0);
    rep.grad_psi_constant = std::max(rep.grad_psi_constant, mq / n0);
  }
  rep.grad_psi_scaled = rep.grad_psi_constant * std::pow(p.eps_beta, 1.5);
  return rep;
}

AcousticState random_acoustic_state(GridPtr g, std::uint64_t seed, int kmax) {
  AcousticState s{random_band_limited(g, rng::mix(seed, 11), kmax), VectorField(g), 0.0};
  for (auto& v : s.sigma.values) v *= 0.5;
  VectorField gp = gradient(random_band_limited(g, rng::mix(seed, 12), kmax));
  const double n = l2_norm(gp);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g->real_size(); ++i) s.grad_psi.comp[c][i] = 0.5 * gp.comp[c][i] / n;
  return s;
}

}  // namespace nsp
