#pragma once

#include <cstdint>
#include <vector>

#include "nsplab/fluid_model.hpp"
#include "nsplab/grid.hpp"

namespace nsp {

// Acoustic block parameters. time_scale = eps^(beta+1) converts a slow step dt into the
// fast time dt/time_scale in which the propagator is written.
struct KGParams {
  double eps_beta = 1.0;
  double gamma = 2.0;
  double time_scale = 1.0;

  static KGParams from(const PhysParams& p);
  void validate() const;
};

// sigma (zero mean) and grad_psi (a pure gradient). time is the slow time.
struct AcousticState {
  ScalarField sigma;
  VectorField grad_psi;
  double time = 0.0;
};

double kg_multiplier_m(double xi_sq, const KGParams& p);
double kg_multiplier_n(double xi_sq, const KGParams& p);
double kg_frequency(double xi_sq, const KGParams& p);
// Peak amplitude transferred from a unit sigma mode into grad_psi, sqrt(gamma + eps^-beta |xi|^-2),
// and the reverse direction (its reciprocal).
double kg_transfer_sigma_to_grad(double xi_sq, const KGParams& p);
double kg_transfer_grad_to_sigma(double xi_sq, const KGParams& p);

// Exact per-mode propagator S(tau) acting on (sigma^, q^) where q^ = (k/|k|).(grad_psi)^.
// Uses the derivative wavevector (Nyquist components zeroed); modes with |k| = 0 are frozen.
class KgPropagator {
 public:
  KgPropagator(const SpectralGrid& g, const KGParams& p, double tau);
  void apply(std::vector<cplx>& sigma, std::vector<cplx>& q) const;
  double tau() const { return tau_; }

 private:
  double tau_;
  std::vector<cplx> rot_;  // exp(-i omega tau)
  std::vector<double> sb_, sa_;
};

// Largest slow dt with dt * omega_max / time_scale <= c.
double kg_admissible_dt(const SpectralGrid& g, const KGParams& p, double c = 0.5);
double kg_omega_max(const SpectralGrid& g, const KGParams& p);

// t in fast time.
AcousticState kg_homogeneous_propagate(const AcousticState& s, const KGParams& p, double t);

// Per half-spectrum mode energy (gamma eps^b + |k|^-2)|sigma^|^2 + eps^b |q^|^2 (0 where |k| = 0),
// and the weighted total over the full spectrum.
std::vector<double> kg_mode_energies(const AcousticState& s, const KGParams& p);
double kg_total_energy(const AcousticState& s, const KGParams& p);

// max_j || (s_{j+1} - 2 s_j + s_{j-1})/dt^2 + omega^2 s_j ||_2 over interior samples; dt in fast time.
double kg_second_order_residual(const std::vector<ScalarField>& samples, double dt, const KGParams& p);

// One exponential step of slow length dt:
// (sigma, q) <- S(dt/time_scale)[(sigma, q) + (0, dt fq + gq)], fq and gq the Q-components of
// the momentum forcing -div(F1+F2) - grad(F1+F2) and of the noise increment.
// noise_increment may be null. Throws StepRejected when dt exceeds kg_admissible_dt.
AcousticState kg_duhamel_step(const AcousticState& s, const ForcingTensors& forcing, const VectorField* noise_increment,
                              const KGParams& p, double dt);
// Same with the forcing given directly as a momentum-space vector field.
AcousticState kg_duhamel_step(const AcousticState& s, const VectorField& forcing, const VectorField* noise_increment,
                              const KGParams& p, double dt);

// Spectral kernel shared with the solver. fq/gq may be empty (treated as zero).
void kg_duhamel_spectral(const KgPropagator& S, std::vector<cplx>& sigma, std::vector<cplx>& q, const std::vector<cplx>& fq,
                         const std::vector<cplx>& gq, double dt);

struct StrichartzReport {
  double sigma_constant = 0.0;     // worst sup_t ||sigma||_2 / (||sigma0||_2 + ||grad_psi0||_2)
  double grad_psi_constant = 0.0;  // same for grad_psi
  double grad_psi_scaled = 0.0;    // grad_psi_constant * eps^(3 beta / 2) when eps, beta are known
  int batch = 0;
};

// sup over samples uniform in [0, t_final] (fast time). Requires >= 8 states.
StrichartzReport strichartz_l2_check(const std::vector<AcousticState>& batch, const KGParams& p, double t_final,
                                     int samples = 64);

// sigma0, grad_psi0 band-limited with ||sigma0||_2 = ||grad_psi0||_2 = 1/2.
AcousticState random_acoustic_state(GridPtr g, std::uint64_t seed, int kmax);

// Spectral conversion helpers.
void acoustic_to_spectral(const AcousticState& s, std::vector<cplx>& sigma, std::vector<cplx>& q);
AcousticState acoustic_from_spectral(GridPtr g, const std::vector<cplx>& sigma, const std::vector<cplx>& q, double time);
// Projection of a momentum-space vector spectrum onto k/|k|.
std::vector<cplx> longitudinal_component(const SpectralGrid& g, const std::array<Spectrum, 3>& v);

}  // namespace nsp
