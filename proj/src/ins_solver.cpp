#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsplab/errors.hpp"
#include "nsplab/solvers.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

namespace {
const cplx I(0.0, 1.0);
}  // namespace

InsIntegrator::InsIntegrator(const VectorField& U0, double nu1, const StepScheme& scheme, const NoiseModel* noise)
    : grid_(U0.grid), nu1_(nu1), scheme_(scheme), noise_(noise) {
  scheme_.validate();
  if (!(nu1 >= 0.0)) throw InvalidArgument("InsIntegrator: nu1 must be >= 0");
  require_finite(U0, "InsIntegrator initial velocity");
  U_ = spec::forward(U0);
  spec::leray(*grid_, U_);
  for (auto& c : U_) spec::zero_nyquist(*grid_, c);
}

VectorField InsIntegrator::velocity() const { return spec::inverse(grid_, U_); }

void InsIntegrator::step(const IncrementSource* noise) {
  if (noise && !noise_) throw InvalidArgument("InsIntegrator::step: increments given but no noise model");
  const auto& g = *grid_;
  const std::size_t N = g.real_size(), S = g.spectral_size();
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  const double dt = scheme_.dt;
  std::array<std::vector<double>, 3> U;
  for (int c = 0; c < 3; ++c) U[c] = g.inverse(U_[c]);
  double umax = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    umax = std::max(umax, std::sqrt(U[0][i] * U[0][i] + U[1][i] * U[1][i] + U[2][i] * U[2][i]));
  if (umax * dt > scheme_.cfl * g.spacing()) {
    std::ostringstream os;
    os << "ins step: CFL violated, max|U| dt/h = " << umax * dt / g.spacing();
    throw StepRejected(os.str(), scheme_.cfl * g.spacing() / umax);
  }
  // -div(U (x) U), projected
  std::array<Spectrum, 3> f;
  for (auto& c : f) c.assign(S, 0.0);
  std::vector<double> work(N);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      for (std::size_t i = 0; i < N; ++i) work[i] = U[a][i] * U[b][i];
      const auto P = g.forward(work);
      for (std::size_t i = 0; i < S; ++i) {
        f[a][i] -= I * kd[b][i] * P[i];
        if (b != a) f[b][i] -= I * kd[a][i] * P[i];
      }
    }
  if (scheme_.dealias)
    for (auto& c : f) spec::apply_mask(g, c);
  std::array<Spectrum, 3> G;
  if (noise) {
    const auto inc = (*noise)(1, 0);
    std::array<std::vector<double>, 3> gr;
    for (auto& c : gr) c.resize(N);
    noise_->apply_raw(nullptr, {U[0].data(), U[1].data(), U[2].data()}, inc.dbeta, {gr[0].data(), gr[1].data(), gr[2].data()});
    for (int c = 0; c < 3; ++c) G[c] = g.forward(gr[c]);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < S; ++i) f[c][i] += G[c][i] / dt;
  }
  spec::leray(g, f);
  for (std::size_t i = 0; i < S; ++i) {
    const double e = std::exp(-nu1_ * k2[i] * dt);
    for (int a = 0; a < 3; ++a) U_[a][i] = e * (U_[a][i] + dt * f[a][i]);
  }
  for (auto& c : U_) spec::zero_nyquist(g, c);
  time_ += dt;
}

VectorField ins_step(const VectorField& U, double nu1, const StepScheme& scheme, const NoiseModel* noise,
                     const WienerPath* path, std::int64_t step_index) {
  InsIntegrator it(U, nu1, scheme, noise);
  if (path) {
    const auto src = path_source(*path, step_index, 1);
    it.step(&src);
  } else {
    it.step(nullptr);
  }
  return it.velocity();
}

}  // namespace nsp
