#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "nsplab/acoustic.hpp"
#include "nsplab/errors.hpp"
#include "nsplab/harness.hpp"
#include "nsplab/random.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kMaxStride = 16;

// L^3 sum_k w_k s_k^2 |a_k|^2 over the three components (s = 1 when sym is null).
double spectral_energy(const SpectralGrid& g, const std::array<Spectrum, 3>& a, const std::vector<double>* sym) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double f = sym ? (*sym)[i] * (*sym)[i] : 1.0;
    s += g.weight()[i] * f * (std::norm(a[0][i]) + std::norm(a[1][i]) + std::norm(a[2][i]));
  }
  return s * g.volume();
}

std::array<Spectrum, 3> gradient_part(const SpectralGrid& g, const std::array<Spectrum, 3>& a) {
  auto p = a;
  spec::leray(g, p);
  std::array<Spectrum, 3> q;
  for (int c = 0; c < 3; ++c) {
    q[c].resize(a[c].size());
    for (std::size_t i = 0; i < a[c].size(); ++i) q[c][i] = a[c][i] - p[c][i];
  }
  return q;
}

// Instantaneous quantities along a trajectory.
struct Sample {
  double grad_m = 0.0, grad_m_fixed = 0.0, grad_u = 0.0, dist2 = 0.0, electric_term = 0.0;
  EnergyComponents energy;
  double orlicz_small = 0.0, orlicz_large = 0.0;
};

}  // namespace

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "grad_momentum_mollified", "grad_momentum_mollified_fixed", "grad_velocity", "sup_kinetic", "sup_internal",
      "sup_electric", "orlicz_small", "orlicz_large", "limit_distance", "electric_term", "energy_violation_max",
      "energy_violation_fraction", "aborted"};
  return names;
}

std::uint64_t initial_seed(const RunConfig& cfg, int path) { return rng::mix(rng::mix(cfg.seed, 1), std::uint64_t(path)); }
std::uint64_t wiener_seed(const RunConfig& cfg, int path) { return rng::mix(rng::mix(cfg.seed, 2), std::uint64_t(path)); }

VectorField electric_test_field(GridPtr grid) {
  auto phi = leray_project(random_band_limited_vector(grid, 0x5eed, 2));
  const double nrm = l2_norm(phi);
  for (auto& c : phi.comp)
    for (auto& x : c) x /= nrm;
  return phi;
}

TimePlan make_time_plan(const RunConfig& cfg) {
  cfg.validate();
  const auto g = SpectralGrid::create(cfg.n, cfg.L);
  std::vector<double> adm;
  double dt_min = kInfinity;
  for (double e : cfg.epsilon_list) {
    adm.push_back(kg_admissible_dt(*g, KGParams::from(cfg.params_for(e)), cfg.dt_fraction));
    dt_min = std::min(dt_min, adm.back());
  }
  TimePlan plan;
  plan.base_steps = std::max<std::int64_t>(1, std::int64_t(std::ceil(cfg.T / dt_min / kMaxStride - 1e-9))) * kMaxStride;
  plan.base_dt = cfg.T / double(plan.base_steps);
  for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i) {
    std::int64_t s = kMaxStride;
    while (s > 1 && double(s) * plan.base_dt > adm[i] * (1.0 + 1e-12)) s /= 2;
    plan.eps.push_back({cfg.epsilon_list[i], s, plan.base_steps / s, double(s) * plan.base_dt});
  }
  return plan;
}

PathResult run_path(const RunConfig& cfg, GridPtr grid, const NoiseModel* noise, const TimePlan& plan,
                    std::size_t eps_index, int path, const PathOptions& opt) {
  const auto& ep = plan.eps.at(eps_index);
  const auto& g = *grid;
  const PhysParams p = cfg.params_for(ep.epsilon);
  StepScheme scheme;
  scheme.dt = ep.dt;
  scheme.splitting = cfg.splitting;
  scheme.dealias = cfg.dealias;
  scheme.cfl = cfg.cfl;
  scheme.max_retries = cfg.max_retries;
  const NoiseModel* nm = cfg.noise ? noise : nullptr;

  PathResult res;
  res.epsilon = ep.epsilon;
  res.path = path;
  for (const auto& m : metric_names()) res.metrics[m] = kNaN;

  const auto seed = initial_seed(cfg, path);
  NspIntegrator nsp(make_ill_prepared_data(grid, p, seed, cfg.M, cfg.initial), p, scheme, nm);
  nsp.enable_ledger();
  std::unique_ptr<InsIntegrator> ins;
  if (opt.reference)
    ins = std::make_unique<InsIntegrator>(leray_project(initial_shapes(grid, seed, cfg.M, cfg.initial).u0), p.nu1,
                                          scheme, nm);
  const WienerPath wp(wiener_seed(cfg, path), cfg.noise_spec.K, plan.base_dt);
  const auto phi = electric_test_field(grid);
  const auto sym = mollifier_symbol(g, MollifierSpec{cfg.kappa_for(ep.epsilon)});
  const auto sym_fixed = mollifier_symbol(g, MollifierSpec{cfg.kappa});
  const double dV = g.cell_volume();

  auto sample = [&]() {
    Sample s;
    const auto q = gradient_part(g, nsp.momentum_hat());
    s.grad_m = spectral_energy(g, q, &sym);
    s.grad_m_fixed = spectral_energy(g, q, &sym_fixed);
    if (ins) {
      auto pm = nsp.momentum_hat();
      spec::leray(g, pm);
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < pm[c].size(); ++i) pm[c][i] -= ins->velocity_hat()[c][i];
      s.dist2 = spectral_energy(g, pm, nullptr);
    }
    const auto st = nsp.state();
    s.grad_u = spectral_energy(g, gradient_part(g, spec::forward(st.velocity())), nullptr);
    const auto gradV = gradient(st.potential);
    const double scale = 1.0 / (p.epsilon * p.epsilon);
    double el = 0.0, small = 0.0, large = 0.0;
    for (std::size_t i = 0; i < g.real_size(); ++i) {
      const double d = st.rho[i] - 1.0;
      el += d * (gradV.comp[0][i] * phi.comp[0][i] + gradV.comp[1][i] * phi.comp[1][i] + gradV.comp[2][i] * phi.comp[2][i]);
      const double sig = std::abs(d) / p.epsilon;
      if (2.0 * sig <= 1.0)
        small += sig * sig;
      else
        large += std::pow(sig, p.gamma);
    }
    s.electric_term = el * scale * dV;
    s.orlicz_small = small * dV;
    s.orlicz_large = large * dV;
    s.energy = nsp.ledger()->current().rows.back().energy;
    return s;
  };

  double ia = 0.0, ia_fixed = 0.0, ib = 0.0, idist = 0.0, iel = 0.0;
  EnergyComponents sup;
  double sup_small = 0.0, sup_large = 0.0;
  auto take_sup = [&](const Sample& s) {
    sup.kinetic = std::max(sup.kinetic, s.energy.kinetic);
    sup.internal = std::max(sup.internal, s.energy.internal);
    sup.electric = std::max(sup.electric, s.energy.electric);
    sup_small = std::max(sup_small, s.orlicz_small);
    sup_large = std::max(sup_large, s.orlicz_large);
  };

  Sample prev = sample();
  take_sup(prev);
  try {
    for (std::int64_t n = 0; n < ep.steps; ++n) {
      const auto src = path_source(wp, n * ep.stride, ep.stride);
      nsp.step(nm ? &src : nullptr);
      if (ins) ins->step(nm ? &src : nullptr);
      const Sample cur = sample();
      const double h = 0.5 * ep.dt;
      ia += h * (prev.grad_m + cur.grad_m);
      ia_fixed += h * (prev.grad_m_fixed + cur.grad_m_fixed);
      ib += h * (prev.grad_u + cur.grad_u);
      idist += h * (prev.dist2 + cur.dist2);
      iel += h * (prev.electric_term + cur.electric_term);
      take_sup(cur);
      prev = cur;
    }
  } catch (const PathAborted& e) {
    res.aborted = true;
    res.abort_reason = e.what();
  } catch (const StepRejected& e) {
    res.aborted = true;
    res.abort_reason = e.what();
  }

  const auto ledger = nsp.ledger()->finish();
  if (opt.keep_ledger) res.ledger = ledger;
  if (opt.keep_final_state) res.final_state = nsp.state();
  res.metrics["aborted"] = res.aborted ? 1.0 : 0.0;
  if (res.aborted) return res;
  res.metrics["grad_momentum_mollified"] = ia;
  res.metrics["grad_momentum_mollified_fixed"] = ia_fixed;
  res.metrics["grad_velocity"] = ib;
  res.metrics["sup_kinetic"] = sup.kinetic;
  res.metrics["sup_internal"] = sup.internal;
  res.metrics["sup_electric"] = sup.electric;
  res.metrics["orlicz_small"] = sup_small;
  res.metrics["orlicz_large"] = sup_large;
  res.metrics["limit_distance"] = ins ? std::sqrt(idist) : kNaN;
  res.metrics["electric_term"] = std::abs(iel);
  res.metrics["energy_violation_max"] = ledger.max_violation;
  res.metrics["energy_violation_fraction"] = ledger.violation_fraction;
  return res;
}

std::string run_id(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.output_dir = "-";
  c.threads = 1;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(c)) h = (h ^ ch) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SweepResult run_sweep(const RunConfig& cfg, const SweepProgress& progress) {
  cfg.validate();
  SweepResult out;
  out.run_id = run_id(cfg);
  out.plan = make_time_plan(cfg);
  const auto grid = SpectralGrid::create(cfg.n, cfg.L);
  std::unique_ptr<NoiseModel> noise;
  if (cfg.noise) noise = std::make_unique<NoiseModel>(grid, cfg.noise_spec);

  const std::size_t E = cfg.epsilon_list.size(), P = std::size_t(cfg.paths);
  std::vector<PathResult> results(E * P);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= results.size()) return;
      try {
        results[j] = run_path(cfg, grid, noise.get(), out.plan, j / P, int(j % P));
        if (progress) {
          std::lock_guard<std::mutex> lock(mu);
          progress(results[j]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = results.size();
      }
    }
  };
  const int width = std::max(1, std::min<int>(cfg.threads, int(results.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  out.surviving.assign(E, 0);
  for (const auto& r : results) {
    const std::size_t e = std::size_t(&r - results.data()) / P;
    if (!r.aborted) ++out.surviving[e];
    for (const auto& m : metric_names()) out.metrics.push_back({out.run_id, r.epsilon, r.path, m, r.metrics.at(m)});
  }
  for (std::size_t e = 0; e < E; ++e)
    if (2 * out.surviving[e] < int(P)) {
      out.failed = true;
      std::ostringstream os;
      os << "only " << out.surviving[e] << " of " << P << " paths survived at eps = " << cfg.epsilon_list[e];
      out.failure = os.str();
      break;
    }
  out.reports = build_reports(cfg, out.metrics);
  return out;
}

std::vector<RateReport> build_reports(const RunConfig& cfg, const std::vector<MetricRow>& metrics) {
  const auto& eps = cfg.epsilon_list;
  auto samples_of = [&](const std::string& name) {
    std::vector<std::vector<double>> s(eps.size());
    for (const auto& r : metrics) {
      if (r.metric != name) continue;
      for (std::size_t e = 0; e < eps.size(); ++e)
        if (r.epsilon == eps[e]) s[e].push_back(r.value);
    }
    return s;
  };
  const double ga = gradient_part_exponent(cfg.params), ge = electric_term_exponent(cfg.params);
  std::vector<RateReport> reps;
  auto add = [&](const std::string& name, ReportKind kind, double pred) {
    reps.push_back(make_report(name, kind, eps, samples_of(name), pred));
  };
  add("grad_momentum_mollified", ReportKind::Rate, ga);
  add("grad_momentum_mollified_fixed", ReportKind::Rate, ga);
  add("grad_velocity", ReportKind::Rate, ga);
  add("electric_term", ReportKind::Rate, ge);
  add("limit_distance", ReportKind::Decay, 0.0);
  add("sup_kinetic", ReportKind::Bounded, 0.0);
  add("sup_internal", ReportKind::Bounded, 0.0);
  add("sup_electric", ReportKind::Bounded, 0.0);
  add("orlicz_small", ReportKind::Bounded, 0.0);
  add("orlicz_large", ReportKind::Bounded, 0.0);
  return reps;
}

std::string render_summary(const std::vector<RateReport>& reports) {
  std::ostringstream os;
  os << "Rate study summary\n"
        "Convergence in law is checked through a stronger surrogate: the L2(0,T;L2) distance between the\n"
        "solenoidal momentum and an incompressible reference driven by the same Wiener path.\n"
        "Rate: strictly decreasing as eps decreases and slope >= "
     << kSlopeFloor
     << " x predicted. Decay: strictly decreasing.\n"
        "Bounded: every eps value <= "
     << kBoundFactor << " x the value at the largest eps.\n\n";
  char line[256];
  for (const auto& r : reports) {
    const char* kind = r.kind == ReportKind::Rate ? "rate" : r.kind == ReportKind::Decay ? "decay" : "bounded";
    std::snprintf(line, sizeof line, "%-30s %-8s predicted %8.4f  slope %8.4f  R2 %7.4f  monotone %-3s  %s\n",
                  r.quantity.c_str(), kind, r.predicted_exponent, r.slope, r.r_squared, r.monotone ? "yes" : "no",
                  r.pass ? "PASS" : "FAIL");
    os << line;
    for (std::size_t e = 0; e < r.epsilons.size() && e < r.means.size(); ++e) {
      std::snprintf(line, sizeof line, "    eps %-10.6g mean %-14.6g se %-12.4g n %d\n", r.epsilons[e], r.means[e],
                    r.std_errors[e], r.samples[e]);
      os << line;
    }
  }
  return os.str();
}

}  // namespace nsp
