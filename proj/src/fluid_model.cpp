#include "nsplab/fluid_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsplab/errors.hpp"
#include "nsplab/random.hpp"

namespace nsp {

namespace {
const cplx I(0.0, 1.0);

void require_positive(const ScalarField& rho, const char* what) {
  require_finite(rho, what);
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!(rho[i] > 0.0))
      throw InvalidArgument(std::string(what) + ": nonpositive density " + std::to_string(rho[i]) + " at index " +
                            std::to_string(i));
}
}  // namespace

void PhysParams::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("PhysParams: " + m); };
  if (!(gamma > 1.5) || !std::isfinite(gamma)) fail("gamma must exceed 3/2");
  if (!(nu1 >= 0.0) || !(nu2 >= 0.0)) fail("viscosities must be nonnegative");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon must lie in (0,1]");
  if (!(delta_slack > 0.0)) fail("delta_slack must be positive");
  if (!(pressure_coeff > 0.0)) fail("pressure_coeff must be positive");
  if (regime == Regime::Quasineutral) {
    if (!(beta > 0.0)) fail("quasineutral regime needs beta > 0");
    if (!(beta < 1.0 / (2.0 + delta_slack))) fail("quasineutral regime needs beta < 1/(2+delta)");
  } else if (beta != 0.0) {
    fail("zero-electron-mass regime needs beta = 0");
  }
}

double PhysParams::eps_beta() const { return beta == 0.0 ? 1.0 : std::pow(epsilon, beta); }

VectorField FluidState::velocity() const {
  VectorField u(rho.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < rho.size(); ++i) u.comp[c][i] = momentum.comp[c][i] / rho[i];
  return u;
}

double relative_energy_point(double rho, double gamma, double a) {
  const double x = rho - 1.0;
  if (gamma == 2.0) return a * x * x;
  return a * (std::expm1(gamma * std::log1p(x)) - gamma * x) / (gamma - 1.0);
}

ScalarField relative_energy(const ScalarField& rho, double gamma, double a) {
  require_positive(rho, "relative_energy");
  ScalarField h(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) h[i] = relative_energy_point(rho[i], gamma, a);
  return h;
}

ScalarField pressure(const ScalarField& rho, double gamma, double a) {
  require_positive(rho, "pressure");
  ScalarField p(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) p[i] = a * std::pow(rho[i], gamma);
  return p;
}

ScalarField sigma_fluctuation(const ScalarField& rho, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("sigma_fluctuation: epsilon must be positive");
  require_finite(rho, "sigma_fluctuation");
  ScalarField s(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) s[i] = (rho[i] - 1.0) / epsilon;
  return s;
}

ScalarField poisson_solve(const ScalarField& rho, double epsilon, double beta) {
  require_finite(rho, "poisson_solve");
  if (!(epsilon > 0.0)) throw InvalidArgument("poisson_solve: epsilon must be positive");
  const double m = mean(rho);
  if (std::abs(m - 1.0) > 1e-10)
    throw InvalidArgument("poisson_solve: incompatible source, mean(rho) - 1 = " + std::to_string(m - 1.0));
  const auto& g = *rho.grid;
  std::vector<double> src(rho.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = rho[i] - 1.0;
  Spectrum a = g.forward(src);
  const double eb = beta == 0.0 ? 1.0 : std::pow(epsilon, beta);
  const auto& k2 = g.xi_sq();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = k2[i] > 0.0 ? -a[i] / (eb * k2[i]) : cplx(0.0);
  return ScalarField(rho.grid, g.inverse(a));
}

double poisson_residual(const ScalarField& rho, const ScalarField& V, double epsilon, double beta) {
  const auto& g = *rho.grid;
  const double eb = beta == 0.0 ? 1.0 : std::pow(epsilon, beta);
  std::vector<double> src(rho.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = rho[i] - 1.0;
  const Spectrum s = g.forward(src);
  Spectrum v = g.forward(V.values);
  const auto& k2 = g.xi_sq();
  Spectrum r(s.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -eb * k2[i] * v[i] - (k2[i] > 0.0 ? s[i] : cplx(0.0));
  // zero mode of the source is the mean defect, reported separately by poisson_solve
  const double num = std::sqrt(g.spectral_inner(r, r));
  const double den = std::sqrt(g.spectral_inner(s, s));
  if (den == 0.0) return num == 0.0 ? 0.0 : kInfinity;
  return num / den;
}

double electric_force_identity_check(const ScalarField& V, double epsilon, double beta) {
  require_finite(V, "electric_force_identity_check");
  const auto& g = *V.grid;
  const std::size_t N = g.real_size(), S = g.spectral_size();
  const Spectrum v = g.forward(V.values);
  const auto& kd = g.kd();
  std::array<std::vector<double>, 3> dv;
  std::vector<double> lap(N);
  {
    std::array<Spectrum, 3> gs;
    spec::gradient(g, v, gs);
    for (int c = 0; c < 3; ++c) dv[c] = g.inverse(gs[c]);
    Spectrum l(S);
    for (std::size_t i = 0; i < S; ++i) l[i] = -g.kd_sq()[i] * v[i];
    g.inverse(l, lap);
  }
  const double scale = std::pow(epsilon, beta - 2.0);
  std::array<Spectrum, 3> lhs, rhs;
  std::vector<double> work(N);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < N; ++i) work[i] = scale * lap[i] * dv[c][i];
    lhs[c] = g.forward(work);
    spec::apply_mask(g, lhs[c]);
    rhs[c].assign(S, 0.0);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < N; ++i) work[i] = scale * dv[a][i] * dv[b][i];
      Spectrum t = g.forward(work);
      spec::apply_mask(g, t);
      for (std::size_t i = 0; i < S; ++i) rhs[a][i] += I * kd[b][i] * t[i];
    }
  for (std::size_t i = 0; i < N; ++i) work[i] = scale * (dv[0][i] * dv[0][i] + dv[1][i] * dv[1][i] + dv[2][i] * dv[2][i]);
  Spectrum q = g.forward(work);
  spec::apply_mask(g, q);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c) {
    Spectrum d(S);
    for (std::size_t i = 0; i < S; ++i) d[i] = lhs[c][i] - (rhs[c][i] - 0.5 * I * kd[c][i] * q[i]);
    num += g.spectral_inner(d, d);
    den += g.spectral_inner(lhs[c], lhs[c]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : kInfinity;
  return std::sqrt(num / den);
}

namespace {
void check_potential(const FluidState& s, const PhysParams& p) {
  const double r = poisson_residual(s.rho, s.potential, p.epsilon, p.beta);
  if (!(r <= 1e-9)) throw InvalidArgument("inconsistent potential: Poisson residual " + std::to_string(r));
}
}  // namespace

ForcingTensors assemble_forcing(const FluidState& state, const PhysParams& params) {
  params.validate();
  require_positive(state.rho, "assemble_forcing");
  require_finite(state.momentum, "assemble_forcing");
  require_finite(state.potential, "assemble_forcing");
  check_potential(state, params);
  const auto gp = state.rho.grid;
  const auto& g = *gp;
  const std::size_t N = g.real_size();
  const VectorField u = state.velocity();
  const VectorField dV = gradient(state.potential);
  const double es = std::pow(params.epsilon, params.beta - 2.0);
  const double e2 = 1.0 / (params.epsilon * params.epsilon);

  ForcingTensors F{TensorField(gp), TensorField(gp), ScalarField(gp), ScalarField(gp)};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      auto& t = F.F1_tensor.at(a, b);
      for (std::size_t i = 0; i < N; ++i)
        t[i] = state.rho[i] * u.comp[a][i] * u.comp[b][i] - es * dV.comp[a][i] * dV.comp[b][i];
    }
  // (grad u)_{ab} = d_b u_a
  std::array<Spectrum, 3> uh = spec::forward(u);
  const auto& kd = g.kd();
  Spectrum divu(g.spectral_size(), 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Spectrum d(g.spectral_size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = -params.nu1 * I * kd[b][i] * uh[a][i];
      g.inverse(d, F.F2_tensor.at(a, b));
    }
  for (std::size_t i = 0; i < divu.size(); ++i) divu[i] = -(params.nu1 + params.nu2) * I * (kd[0][i] * uh[0][i] + kd[1][i] * uh[1][i] + kd[2][i] * uh[2][i]);
  g.inverse(divu, F.F2_scalar.values);
  const double gm1 = params.gamma - 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double gv2 = dV.comp[0][i] * dV.comp[0][i] + dV.comp[1][i] * dV.comp[1][i] + dV.comp[2][i] * dV.comp[2][i];
    F.F1_scalar[i] = e2 * gm1 * relative_energy_point(state.rho[i], params.gamma, params.pressure_coeff) + es * 0.5 * gv2;
  }
  return F;
}

EnergyComponents energy_components(const FluidState& state, const PhysParams& params) {
  require_positive(state.rho, "energy_functional");
  const auto& g = *state.rho.grid;
  const double dv = g.cell_volume();
  EnergyComponents e;
  double kin = 0.0, h = 0.0;
  for (std::size_t i = 0; i < state.rho.size(); ++i) {
    double m2 = 0.0;
    for (int c = 0; c < 3; ++c) m2 += state.momentum.comp[c][i] * state.momentum.comp[c][i];
    kin += 0.5 * m2 / state.rho[i];
    h += relative_energy_point(state.rho[i], params.gamma, params.pressure_coeff);
  }
  e.kinetic = kin * dv;
  e.internal = h * dv / (params.epsilon * params.epsilon);
  // 1/2 eps^(beta-2) ||grad V||^2 via Parseval
  const Spectrum v = g.forward(state.potential.values);
  double gv = 0.0;
  const auto& k2 = g.kd_sq();
  const auto& w = g.weight();
  for (std::size_t i = 0; i < v.size(); ++i) gv += w[i] * k2[i] * std::norm(v[i]);
  e.electric = 0.5 * std::pow(params.epsilon, params.beta - 2.0) * gv * g.volume();
  return e;
}

double energy_functional(const FluidState& state, const PhysParams& params) {
  return energy_components(state, params).total();
}

InitialShapes initial_shapes(GridPtr grid, std::uint64_t seed, double M, const InitialDataOptions& opt) {
  if (!(M >= 0.0)) throw InvalidArgument("initial data: amplitude M must be >= 0");
  InitialShapes s{ScalarField(grid), VectorField(grid)};
  if (M > 0.0) {
    s.sigma0 = random_band_limited(grid, rng::mix(seed, 1), opt.kmax);
    const double mx = lp_norm(s.sigma0, kInfinity);
    for (auto& v : s.sigma0.values) v *= M / mx;
  }
  const double rms = std::sqrt(grid->volume());
  VectorField sol = leray_project(random_band_limited_vector(grid, rng::mix(seed, 2), opt.kmax));
  const double ns = l2_norm(sol) / rms;
  VectorField grad = gradient(random_band_limited(grid, rng::mix(seed, 3), opt.kmax));
  const double ng = l2_norm(grad) / rms;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < grid->real_size(); ++i)
      s.u0.comp[c][i] = opt.sol_amplitude * sol.comp[c][i] / ns + opt.grad_amplitude * grad.comp[c][i] / ng;
  return s;
}

FluidState make_ill_prepared_data(GridPtr grid, const PhysParams& params, std::uint64_t seed, double M,
                                  const InitialDataOptions& opt) {
  params.validate();
  if (!(params.epsilon * M < 1.0))
    throw InvalidArgument("initial data: eps*M = " + std::to_string(params.epsilon * M) + " violates positivity (need < 1)");
  const InitialShapes sh = initial_shapes(grid, seed, M, opt);
  FluidState st;
  st.rho = ScalarField(grid);
  for (std::size_t i = 0; i < grid->real_size(); ++i) st.rho[i] = 1.0 + params.epsilon * sh.sigma0[i];
  st.momentum = VectorField(grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < grid->real_size(); ++i) st.momentum.comp[c][i] = st.rho[i] * sh.u0.comp[c][i];
  st.potential = poisson_solve(st.rho, params.epsilon, params.beta);
  st.potential_consistent = true;
  st.time = 0.0;
  return st;
}

}  // namespace nsp
