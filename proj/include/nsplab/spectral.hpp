#pragma once

#include <functional>
#include <limits>

#include "nsplab/grid.hpp"

namespace nsp {

// Fourier multiplier mu(xi), xi the true wavevector.
using Multiplier = std::function<cplx(const Vec3&)>;

// Inverse transform of mu(xi) f^(xi). The output is real, so what is applied is the
// Hermitian part (mu(xi) + conj(mu(-xi)))/2, with -xi taken on the lattice; for
// Hermitian mu that is mu itself. Throws on non-finite input or non-finite mu.
ScalarField apply_multiplier(const ScalarField& f, const Multiplier& mu);
VectorField apply_multiplier(const VectorField& f, const Multiplier& mu);

struct HelmholtzParts {
  VectorField P_part;
  VectorField Q_part;
};
HelmholtzParts helmholtz(const VectorField& v);
VectorField leray_project(const VectorField& v);
VectorField gradient_project(const VectorField& v);

// Zero-mean g with Laplacian g = f - mean f.
ScalarField inverse_laplacian(const ScalarField& f);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
VectorField curl(const VectorField& v);
ScalarField laplacian(const ScalarField& f);

enum class MollifierKind { GaussianFourier, BumpFourier };

struct MollifierSpec {
  double kappa = 0.5;
  MollifierKind kind = MollifierKind::GaussianFourier;
};

// Symbol of the kernel at every half-spectrum index (real, in [0,1] for Gaussian).
// BumpFourier samples the compactly supported C-infinity bump of radius kappa on the
// grid (periodized, unit discrete mass) and transforms it.
std::vector<double> mollifier_symbol(const SpectralGrid& g, const MollifierSpec& spec);
double gaussian_symbol(double kappa, double xi_sq);

ScalarField mollify(const ScalarField& f, const MollifierSpec& spec);
VectorField mollify(const VectorField& f, const MollifierSpec& spec);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ||[f]_kappa||_{L^p} / (kappa^{-s-3(1/r-1/p)} ||f||_{-s,r}) with the surrogate
// ||f||_{-s,r} = ||F^-1[(1+|xi|^2)^{-s/2} f^]||_{L^r}. Requires 1 <= r <= p <= inf, s >= 0.
double mollifier_inverse_estimate_check(const ScalarField& f, double kappa, double s, double r, double p,
                                        MollifierKind kind = MollifierKind::GaussianFourier);

double mean(const ScalarField& f);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
// p = kInfinity gives the max norm; vector fields use the pointwise Euclidean length.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& v, double p);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

void require_finite(const ScalarField& f, const char* what);
void require_finite(const VectorField& v, const char* what);

// Random real field whose coefficients are supported on 1 <= max|k_i| <= kmax,
// normalized to unit L2 norm. Deterministic in seed.
ScalarField random_band_limited(GridPtr g, std::uint64_t seed, int kmax);
VectorField random_band_limited_vector(GridPtr g, std::uint64_t seed, int kmax);

// Spectral-level helpers used by the solvers.
namespace spec {
// out_c = i kd_c * a
void gradient(const SpectralGrid& g, std::span<const cplx> a, std::array<Spectrum, 3>& out);
// sum_c i kd_c a_c
void divergence(const SpectralGrid& g, const std::array<Spectrum, 3>& a, Spectrum& out);
void apply_mask(const SpectralGrid& g, Spectrum& a);
void zero_nyquist(const SpectralGrid& g, Spectrum& a);
// In-place Leray projection.
void leray(const SpectralGrid& g, std::array<Spectrum, 3>& a);
std::array<Spectrum, 3> forward(const VectorField& v);
VectorField inverse(GridPtr g, const std::array<Spectrum, 3>& a);
}  // namespace spec

}  // namespace nsp
