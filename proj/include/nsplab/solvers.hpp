#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nsplab/acoustic.hpp"
#include "nsplab/fluid_model.hpp"
#include "nsplab/grid.hpp"
#include "nsplab/noise.hpp"

namespace nsp {

enum class Splitting { AcousticExponential, FullyExplicit };

struct StepScheme {
  double dt = 1e-3;
  Splitting splitting = Splitting::AcousticExponential;
  bool dealias = true;
  double cfl = 0.5;  // max |u| dt / h
  int max_retries = 5;

  void validate() const;
};

// A path that could not be continued (positivity lost after all retries).
class PathAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Noise for one step split into `pieces` equal parts: returns part `piece`.
// pieces is a power of two (1 on the first attempt).
using IncrementSource = std::function<WienerIncrement(int pieces, int piece)>;

// Increment source reading base steps [first, first + stride) of a Wiener path.
IncrementSource path_source(const WienerPath& path, std::int64_t first, std::int64_t stride);

// Terms of the pathwise energy inequality over one sub-step, all evaluated at its left end.
struct LedgerTerms {
  EnergyComponents energy;
  double dissipation_rate = 0.0;  // nu1 |grad u|^2 + (nu1 + nu2)|div u|^2, integrated
  double ito_rate = 0.0;          // 1/2 int rho^-1 sum_k |g_k|^2
  double martingale = 0.0;        // int u . G dW
};

struct LedgerRow {
  std::int64_t step = 0;
  double time = 0.0;
  EnergyComponents energy;
  double dissipation_cum = 0.0;
  double ito_cum = 0.0;
  double martingale_cum = 0.0;
  double violation = 0.0;  // LHS - RHS; > 0 means the inequality is violated
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
  double tolerance = 0.0;         // tau_E = 1e-3 (E0 + 1)
  double max_violation = 0.0;     // max(0, max_n violation)
  double violation_fraction = 0.0;  // fraction of rows with violation > tolerance
};

// gdw may be null (noise off); noise may be null when gdw is.
LedgerTerms ledger_terms(const FluidState& s, const VectorField* gdw, const NoiseModel* noise, double dt,
                         const PhysParams& p);

// Builds the ledger incrementally: begin() with the initial energy, add() per sub-step,
// row() to close a (possibly multi-sub-step) step at the current energy.
class LedgerAccumulator {
 public:
  void begin(const EnergyComponents& e0, double t0 = 0.0);
  void add(const LedgerTerms& t, double dt);
  void row(std::int64_t step, double time, const EnergyComponents& e);
  EnergyLedger finish() const;
  // Rows so far (max_violation and violation_fraction are filled by finish()).
  const EnergyLedger& current() const { return ledger_; }

 private:
  EnergyLedger ledger_;
  double e0_ = 0.0, diss_ = 0.0, ito_ = 0.0, mart_ = 0.0;
};

// Ledger of a stored trajectory: states[0..N] and the noise fields G dW of each step
// (empty when noise is off). dts[n] is the length of step n.
EnergyLedger energy_monitor(const std::vector<FluidState>& states, const std::vector<VectorField>& increments,
                            const std::vector<double>& dts, const NoiseModel* noise, const PhysParams& p);

struct StepInfo {
  double dt = 0.0;
  int substeps = 1;
};

// Stochastic NSP integrator holding its state spectrally as (sigma^, m^).
class NspIntegrator {
 public:
  NspIntegrator(const FluidState& initial, const PhysParams& params, const StepScheme& scheme,
                const NoiseModel* noise = nullptr);

  // Advances by scheme.dt. noise may be null (noise off). On positivity failure the step is
  // retried with 2, 4, ... sub-steps (up to 2^max_retries), then PathAborted.
  // Throws StepRejected when dt violates the acoustic or CFL bound.
  StepInfo step(const IncrementSource* noise = nullptr);

  FluidState state() const;
  double time() const { return time_; }
  std::int64_t steps_taken() const { return steps_; }
  const PhysParams& params() const { return params_; }
  const StepScheme& scheme() const { return scheme_; }
  const KGParams& kg() const { return kg_; }
  GridPtr grid() const { return grid_; }
  double admissible_dt() const;

  // Energy ledger tracking (off by default). When on, each sub-step feeds ledger_terms.
  void enable_ledger();
  const LedgerAccumulator* ledger() const { return ledger_on_ ? &ledger_ : nullptr; }

  // Spectral state access for the harness.
  const Spectrum& sigma_hat() const { return sig_; }
  const std::array<Spectrum, 3>& momentum_hat() const { return m_; }

 private:
  struct Stage;
  // false when the density is not positive at the evaluated state
  bool evaluate(const Spectrum& sig, const std::array<Spectrum, 3>& m, const WienerIncrement* inc, Stage& out) const;
  bool substep(double dt, const WienerIncrement* inc, bool first);
  const KgPropagator& propagator(double dt);
  GridPtr grid_;
  PhysParams params_;
  StepScheme scheme_;
  KGParams kg_;
  const NoiseModel* noise_;
  Spectrum sig_;
  std::array<Spectrum, 3> m_;
  double time_ = 0.0;
  std::int64_t steps_ = 0;
  bool ledger_on_ = false;
  LedgerAccumulator ledger_;
  std::unique_ptr<KgPropagator> prop_;
  double prop_dt_ = -1.0;
};

// Stochastic incompressible Navier-Stokes reference, U solenoidal, diffusion G(1, U).
class InsIntegrator {
 public:
  InsIntegrator(const VectorField& U0, double nu1, const StepScheme& scheme, const NoiseModel* noise = nullptr);

  // Throws StepRejected on CFL violation.
  void step(const IncrementSource* noise = nullptr);

  VectorField velocity() const;
  const std::array<Spectrum, 3>& velocity_hat() const { return U_; }
  double time() const { return time_; }
  GridPtr grid() const { return grid_; }

 private:
  GridPtr grid_;
  double nu1_;
  StepScheme scheme_;
  const NoiseModel* noise_;
  std::array<Spectrum, 3> U_;
  double time_ = 0.0;
};

// Single-step conveniences matching the operation surface.
FluidState nsp_step(const FluidState& s, const PhysParams& p, const StepScheme& scheme, const NoiseModel* noise,
                    const WienerPath* path, std::int64_t step_index);
VectorField ins_step(const VectorField& U, double nu1, const StepScheme& scheme, const NoiseModel* noise,
                     const WienerPath* path, std::int64_t step_index);

}  // namespace nsp
