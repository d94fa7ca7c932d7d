#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "nsplab/errors.hpp"
#include "nsplab/harness.hpp"

using namespace nsp;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

void add_common(CLI::App* sub, Common& c, bool need_config) {
  auto* opt = sub->add_option("-c,--config", c.config, "flat key = value config file");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("-o,--out", c.out, "output directory (default: config output_dir under $" + std::string(kOutputRootEnv) + ")");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg) { return c.out.empty() ? resolve_output_dir(cfg) : fs::path(c.out); }

void print_checks(const std::vector<CheckResult>& checks, bool& ok) {
  for (const auto& r : checks) {
    std::printf("  %-58s %12.4e  (threshold %.1e)  %s\n", r.name.c_str(), r.value, r.threshold, r.pass ? "ok" : "FAILED");
    ok = ok && r.pass;
  }
}

int cmd_kg_verify(const Common& c) {
  bool ok = true;
  std::printf("Klein-Gordon exactness (32^3)\n");
  print_checks(kg_exactness_checks(32), ok);
  std::printf("beta = 0 uniformity\n");
  print_checks(kg_beta0_checks(32), ok);
  const auto rows = default_multiplier_table();
  std::printf("Multiplier bounds (32^3 lattice on [0, 16 pi)^3)\n");
  std::printf("  %-10s %-8s %7s %7s %11s %11s %12s %10s %s\n", "gamma", "eps^beta", "A", "B", "max m (A)", "max m (B)",
              "max n", "nm err", "violations");
  for (const auto& r : rows) {
    std::printf("  %-10.6g %-8.3g %7d %7d %11.6f %11.6f %12.5g %10.2e %d\n", r.gamma, r.eps_beta, r.modes_A, r.modes_B,
                r.max_m_A, r.max_m_B, r.max_n, r.max_nm_error, r.violations);
    ok = ok && r.violations == 0;
  }
  const auto dir = out_dir(c, RunConfig{});
  write_text(dir / "multipliers.csv", multipliers_csv(rows));
  std::printf("wrote %s\n%s\n", (dir / "multipliers.csv").c_str(), ok ? "kg-verify: PASS" : "kg-verify: FAIL");
  return ok ? 0 : 1;
}

int cmd_mollifier(int n) {
  MollifierStudyOptions opt;
  opt.n = n;
  bool ok = true;
  for (const auto& r : mollifier_scaling_study(opt)) {
    std::printf("p = %g: predicted exponent %.4f, fitted %.4f (R2 %.4f) %s\n", r.p, r.predicted, r.slope, r.r_squared,
                r.pass ? "ok" : "FAILED");
    for (std::size_t j = 0; j < r.kappas.size(); ++j) std::printf("    kappa %.5f  ratio %.6e\n", r.kappas[j], r.ratios[j]);
    ok = ok && r.pass;
  }
  std::printf("%s\n", ok ? "mollifier-verify: PASS" : "mollifier-verify: FAIL");
  return ok ? 0 : 1;
}

std::size_t eps_index(const RunConfig& cfg, std::optional<double> eps) {
  if (!eps) return 0;
  for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i)
    if (std::abs(cfg.epsilon_list[i] - *eps) <= 1e-12 * *eps) return i;
  throw InvalidArgument("--epsilon must be one of the config epsilon_list values");
}

int cmd_simulate(const Common& c, std::optional<double> eps, int path) {
  const auto cfg = load(c);
  const auto plan = make_time_plan(cfg);
  const auto ei = eps_index(cfg, eps);
  const auto grid = SpectralGrid::create(cfg.n, cfg.L);
  std::unique_ptr<NoiseModel> noise;
  if (cfg.noise) noise = std::make_unique<NoiseModel>(grid, cfg.noise_spec);
  PathOptions opt;
  opt.keep_ledger = true;
  opt.keep_final_state = true;
  const auto r = run_path(cfg, grid, noise.get(), plan, ei, path, opt);
  const auto dir = out_dir(c, cfg) / "simulate";
  write_text(dir / "ledger.csv", ledger_csv(r.ledger));
  std::vector<MetricRow> rows;
  for (const auto& m : metric_names()) rows.push_back({run_id(cfg), r.epsilon, path, m, r.metrics.at(m)});
  write_text(dir / "metrics.csv", metrics_csv(rows));
  write_text(dir / "config.cfg", serialize_config(cfg));
  if (!r.aborted) write_checkpoint(dir / "final", r.final_state, cfg.params_for(r.epsilon));
  std::printf("eps %g, path %d, dt %g, %lld steps\n", r.epsilon, path, plan.eps[ei].dt,
              static_cast<long long>(plan.eps[ei].steps));
  if (r.aborted) std::printf("path aborted: %s\n", r.abort_reason.c_str());
  std::printf("energy ledger: tolerance %.4g, max violation %.4g, violating fraction %.4g\n", r.ledger.tolerance,
              r.ledger.max_violation, r.ledger.violation_fraction);
  std::printf("wrote %s\n", dir.c_str());
  return r.aborted ? 2 : 0;
}

int cmd_sweep(const Common& c) {
  const auto cfg = load(c);
  const auto plan = make_time_plan(cfg);
  std::printf("sweep: %zu eps values x %d paths, base dt %.6g (%lld base steps), threads %d\n", cfg.epsilon_list.size(),
              cfg.paths, plan.base_dt, static_cast<long long>(plan.base_steps), cfg.threads);
  const auto res = run_sweep(cfg, [](const PathResult& r) {
    std::printf("  eps %-10.6g path %-3d %s\n", r.epsilon, r.path, r.aborted ? ("aborted: " + r.abort_reason).c_str() : "done");
    std::fflush(stdout);
  });
  const auto dir = out_dir(c, cfg);
  write_text(dir / "metrics.csv", metrics_csv(res.metrics));
  write_text(dir / "rates.csv", rates_csv(res.reports));
  write_text(dir / "config.cfg", serialize_config(cfg));
  const auto summary = render_summary(res.reports);
  write_text(dir / "summary.txt", summary);
  std::cout << summary;
  std::printf("wrote %s\n", dir.c_str());
  if (res.failed) {
    std::printf("sweep FAILED: %s\n", res.failure.c_str());
    return 2;
  }
  return 0;
}

int cmd_compare(const Common& c, int path) {
  const auto cfg = load(c);
  const auto plan = make_time_plan(cfg);
  const auto grid = SpectralGrid::create(cfg.n, cfg.L);
  std::unique_ptr<NoiseModel> noise;
  if (cfg.noise) noise = std::make_unique<NoiseModel>(grid, cfg.noise_spec);
  std::vector<MetricRow> rows;
  std::vector<double> dist;
  std::printf("coupled-path distance ||P(rho u) - U_ref||_{L2 L2}, path %d\n", path);
  for (std::size_t e = 0; e < plan.eps.size(); ++e) {
    const auto r = run_path(cfg, grid, noise.get(), plan, e, path);
    const double d = r.metrics.at("limit_distance");
    dist.push_back(d);
    rows.push_back({run_id(cfg), r.epsilon, path, "limit_distance", d});
    std::printf("  eps %-10.6g %.6e%s\n", r.epsilon, d, r.aborted ? "  (aborted)" : "");
  }
  const auto dir = out_dir(c, cfg);
  write_text(dir / "compare.csv", metrics_csv(rows));
  const bool dec = strictly_decreasing(dist);
  std::printf("strictly decreasing in eps: %s\nwrote %s\n", dec ? "yes" : "no", (dir / "compare.csv").c_str());
  return dec ? 0 : 1;
}

int cmd_report(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  const auto cfg = load_config(dir / "config.cfg");
  const auto metrics = parse_metrics_csv(read_text(dir / "metrics.csv"));
  const auto reports = build_reports(cfg, metrics);
  if (fs::exists(dir / "rates.csv")) {
    const auto stored = parse_rates_csv(read_text(dir / "rates.csv"));
    if (rates_csv(stored) != rates_csv(reports))
      std::printf("warning: rates.csv differs from the reports rebuilt from metrics.csv\n");
  }
  std::cout << render_summary(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Navier-Stokes-Poisson numerical lab"};
  app.require_subcommand(1);

  Common kg, sim, sw, cmp;
  auto* s_kg = app.add_subcommand("kg-verify", "acoustic propagator property suite and multiplier tables");
  s_kg->add_option("-o,--out", kg.out, "directory for multipliers.csv");

  auto* s_sim = app.add_subcommand("simulate", "single trajectory with energy ledger");
  add_common(s_sim, sim, true);
  std::optional<double> sim_eps;
  int sim_path = 0;
  s_sim->add_option("--epsilon", sim_eps, "eps value from epsilon_list (default: the first)");
  s_sim->add_option("--path", sim_path, "Monte Carlo path index")->check(CLI::NonNegativeNumber);

  auto* s_sw = app.add_subcommand("sweep", "full rate study: metrics.csv, rates.csv, summary.txt");
  add_common(s_sw, sw, true);
  s_sw->add_option("--threads", sw.threads, "concurrent (eps, path) jobs")->check(CLI::PositiveNumber);

  auto* s_mo = app.add_subcommand("mollifier-verify", "mollifier scaling exponents");
  int mo_n = 128;
  s_mo->add_option("--n", mo_n, "grid size")->check(CLI::PositiveNumber);

  auto* s_cmp = app.add_subcommand("compare", "coupled-path NSP vs incompressible reference across eps");
  add_common(s_cmp, cmp, true);
  int cmp_path = 0;
  s_cmp->add_option("--path", cmp_path, "Monte Carlo path index")->check(CLI::NonNegativeNumber);

  auto* s_rep = app.add_subcommand("report", "re-render the summary from stored CSVs");
  std::string rep_dir;
  s_rep->add_option("dir", rep_dir, "sweep output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s_kg) return cmd_kg_verify(kg);
    if (*s_sim) return cmd_simulate(sim, sim_eps, sim_path);
    if (*s_sw) return cmd_sweep(sw);
    if (*s_mo) return cmd_mollifier(mo_n);
    if (*s_cmp) return cmd_compare(cmp, cmp_path);
    if (*s_rep) return cmd_report(rep_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
