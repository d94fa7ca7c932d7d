#pragma once

#include <cstdint>

#include "nsplab/grid.hpp"
#include "nsplab/spectral.hpp"

namespace nsp {

enum class Regime { Quasineutral, ZeroElectronMass };

struct PhysParams {
  double gamma = 2.0;
  double nu1 = 0.05;
  double nu2 = 0.0;
  double epsilon = 0.1;
  double beta = 0.2;
  double delta_slack = 0.1;
  double pressure_coeff = 1.0;  // a in p = a rho^gamma
  Regime regime = Regime::Quasineutral;

  // Throws InvalidArgument on any violated invariant.
  void validate() const;
  double eps_beta() const;
  // Coefficient of the linearized pressure gradient: a * gamma.
  double sound_gamma() const { return pressure_coeff * gamma; }
};

struct FluidState {
  ScalarField rho;
  VectorField momentum;
  ScalarField potential;
  double time = 0.0;
  bool potential_consistent = false;

  VectorField velocity() const;
};

struct ForcingTensors {
  TensorField F1_tensor;
  TensorField F2_tensor;
  ScalarField F1_scalar;
  ScalarField F2_scalar;
};

struct EnergyComponents {
  double kinetic = 0.0;
  double internal = 0.0;
  double electric = 0.0;
  double total() const { return kinetic + internal + electric; }
};

// a/(gamma-1) [rho^gamma - gamma(rho-1) - 1]
ScalarField relative_energy(const ScalarField& rho, double gamma, double a = 1.0);
double relative_energy_point(double rho, double gamma, double a = 1.0);
ScalarField pressure(const ScalarField& rho, double gamma, double a = 1.0);
ScalarField sigma_fluctuation(const ScalarField& rho, double epsilon);
// Zero-mean V with eps^beta Lap V = rho - 1. Requires |mean(rho) - 1| <= 1e-10.
ScalarField poisson_solve(const ScalarField& rho, double epsilon, double beta);
// ||eps^beta Lap V - (rho-1)||_2 / ||rho-1||_2 (0 when both vanish).
double poisson_residual(const ScalarField& rho, const ScalarField& V, double epsilon, double beta);

// Relative residual of  Lap V grad V = div(grad V x grad V) - 1/2 grad|grad V|^2, both sides
// scaled by eps^(beta-2) and evaluated spectrally with dealiased products.
double electric_force_identity_check(const ScalarField& V, double epsilon, double beta);

ForcingTensors assemble_forcing(const FluidState& state, const PhysParams& params);

EnergyComponents energy_components(const FluidState& state, const PhysParams& params);
double energy_functional(const FluidState& state, const PhysParams& params);

struct InitialDataOptions {
  double sol_amplitude = 1.0;   // rms of P u0
  double grad_amplitude = 1.0;  // rms of Q u0
  int kmax = 3;                 // band limit (max-norm of integer wavevector)
};

// rho0 = 1 + eps sigma0 with band-limited zero-mean sigma0, ||sigma0||_inf = M; u0 has
// solenoidal and gradient parts. The shapes of sigma0 and u0 depend on seed only, not on eps.
FluidState make_ill_prepared_data(GridPtr grid, const PhysParams& params, std::uint64_t seed, double M,
                                  const InitialDataOptions& opt = {});

// The eps-independent shapes used above: sigma0 (max norm M) and u0.
struct InitialShapes {
  ScalarField sigma0;
  VectorField u0;
};
InitialShapes initial_shapes(GridPtr grid, std::uint64_t seed, double M, const InitialDataOptions& opt = {});

}  // namespace nsp
