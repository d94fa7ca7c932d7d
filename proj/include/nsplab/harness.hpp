#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nsplab/config.hpp"
#include "nsplab/io.hpp"
#include "nsplab/rates.hpp"
#include "nsplab/solvers.hpp"

namespace nsp {

// ---- multiplier bounds ----

struct MultiplierRow {
  double gamma = 0.0;
  double eps_beta = 0.0;
  int modes_A = 0;          // eps^beta < |xi| <= 1
  int modes_B = 0;          // |xi| > 1
  int modes_outside = 0;    // 0 < |xi| <= eps^beta (no bound claimed)
  double max_m_A = 0.0;     // bound 1/(gamma+1), non-strict
  double max_m_B = 0.0;     // bound 1/gamma, strict
  double max_n = 0.0;       // over A and B; bound (gamma+1)/eps^(2 beta), strict
  double max_nm_error = 0.0;  // max |n m - eps^beta| / eps^beta
  int violations = 0;
};

// Exhaustive check over the nonzero modes of an n^3 lattice on [0,L)^3, for every pair.
std::vector<MultiplierRow> verify_multiplier_bounds(int n, double L, const std::vector<double>& gammas,
                                                    const std::vector<double>& eps_betas);
// Pairs of the acceptance table: gamma in {3/2+, 2, 3}, eps^beta in {0.5, 0.25, 0.1}, 32^3 on [0, 16 pi)^3.
std::vector<MultiplierRow> default_multiplier_table();
std::string multipliers_csv(const std::vector<MultiplierRow>& rows);

// ---- acoustic property suite ----

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Propagator against a per-mode RK4 oracle (relative, <= 1e-6), group property and per-mode
// energy conservation (<= 1e-10), second-order residual order (>= 1.9); n^3 grid on [0, 2 pi)^3.
std::vector<CheckResult> kg_exactness_checks(int n = 32);
// beta = 0: transfer amplitudes and propagated states at eps in {1, 0.1, 0.01}; relative spread <= 1e-10.
std::vector<CheckResult> kg_beta0_checks(int n = 32);

// ---- mollifier scaling ----

struct MollifierScaling {
  double p = 2.0;
  double predicted = 0.0;  // 1 - 3 (1/2 - 1/p)
  std::vector<double> kappas;
  std::vector<double> ratios;  // max over the field family of ||f - [f]_kappa||_p / ||grad f||_2
  double slope = 0.0;
  double r_squared = 0.0;
  bool pass = false;  // |slope - predicted| <= tolerance * max(1, |predicted|)
};

struct MollifierStudyOptions {
  int n = 128;
  double L = 6.283185307179586;
  std::vector<double> ps{2.0, 6.0};
  int kappa_points = 7;   // geometric in [4h, L/8]
  int widths = 12;        // Gaussian bump widths, geometric in [1.5h, L/4]
  int bumps = 4;          // bumps per field
  std::uint64_t seed = 11;
  double tolerance = 0.15;
};

// Fits the kappa-exponent of sup_f ||f - [f]_kappa||_{L^p} / ||grad f||_{L^2} over a family of
// random Gaussian-bump fields of varying width (the estimate is sharp on such families).
std::vector<MollifierScaling> mollifier_scaling_study(const MollifierStudyOptions& opt = {});

// ---- time plan ----

struct EpsPlan {
  double epsilon = 0.0;
  std::int64_t stride = 1;  // base steps per integrator step (power of two <= 16)
  std::int64_t steps = 0;
  double dt = 0.0;
};

struct TimePlan {
  double base_dt = 0.0;
  std::int64_t base_steps = 0;  // multiple of 16, base_steps * base_dt = T
  std::vector<EpsPlan> eps;
};

TimePlan make_time_plan(const RunConfig& cfg);

// ---- single trajectory ----

// Metric names in emission order.
const std::vector<std::string>& metric_names();

struct PathResult {
  double epsilon = 0.0;
  int path = 0;
  bool aborted = false;
  std::string abort_reason;
  std::map<std::string, double> metrics;  // NaN entries for aborted paths, except "aborted"
  EnergyLedger ledger;
  FluidState final_state;  // filled when PathOptions::keep_final_state
};

struct PathOptions {
  bool keep_ledger = false;   // copy the ledger rows into the result
  bool reference = true;      // run the incompressible reference in lockstep
  bool keep_final_state = false;
};

// Simulates path `path` at eps over [0, T] on the plan, recording every metric.
PathResult run_path(const RunConfig& cfg, GridPtr grid, const NoiseModel* noise, const TimePlan& plan,
                    std::size_t eps_index, int path, const PathOptions& opt = {});

// Seeds of the initial data and of the Wiener path of a Monte Carlo path.
std::uint64_t initial_seed(const RunConfig& cfg, int path);
std::uint64_t wiener_seed(const RunConfig& cfg, int path);

// Fixed band-limited solenoidal test field of unit L2 norm for the electric term.
VectorField electric_test_field(GridPtr grid);

// ---- sweep ----

struct SweepResult {
  std::string run_id;
  TimePlan plan;
  std::vector<MetricRow> metrics;  // sorted by (eps index, path, metric order)
  std::vector<RateReport> reports;
  std::vector<int> surviving;      // per eps
  bool failed = false;             // < 50% surviving paths at some eps
  std::string failure;
};

using SweepProgress = std::function<void(const PathResult&)>;

SweepResult run_sweep(const RunConfig& cfg, const SweepProgress& progress = {});

// Reports from a metrics table (also used to re-render stored CSVs).
std::vector<RateReport> build_reports(const RunConfig& cfg, const std::vector<MetricRow>& metrics);

// Human-readable summary of reports with the operationalization notes.
std::string render_summary(const std::vector<RateReport>& reports);

// Stable identifier of a config (hash of its serialization).
std::string run_id(const RunConfig& cfg);

}  // namespace nsp
