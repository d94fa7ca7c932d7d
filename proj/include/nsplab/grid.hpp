#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace nsp {

using cplx = std::complex<double>;
using Spectrum = std::vector<cplx>;
using Vec3 = std::array<double, 3>;

// Periodic box [0,L)^3 with n points per axis. Real layout is x1-major:
// index (i*n + j)*n + l. Spectra use the r2c half layout (i*n + j)*(n/2+1) + l.
// Spectral coefficients are normalized: forward() divides by n^3, so a unit cosine
// mode has coefficient 1/2.
class SpectralGrid {
 public:
  SpectralGrid(int n, double box_length);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  static std::shared_ptr<const SpectralGrid> create(int n, double box_length);

  int n() const { return n_; }
  int nh() const { return nh_; }
  double box_length() const { return L_; }
  double spacing() const { return L_ / n_; }
  double cell_volume() const;
  double volume() const { return L_ * L_ * L_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t spectral_size() const { return spec_size_; }
  double coordinate(int i) const { return i * spacing(); }

  // Integer wavenumber of axis index i in [-n/2, n/2).
  int wavenumber(int i) const { return i < n_ / 2 ? i : i - n_; }
  // True wavevector 2pi/L * k of a spectral index.
  Vec3 wavevector(std::size_t idx) const;
  std::array<int, 3> mode(std::size_t idx) const;
  // Spectral index of the mode -k (its representative inside the half layout).
  // Only meaningful for l = 0 or l = n/2 planes; otherwise the partner is implicit.
  std::size_t conjugate_index(std::size_t idx) const;

  // |xi|^2 with the true wavevector.
  const std::vector<double>& xi_sq() const { return xi_sq_; }
  // Derivative wavevector: true components with Nyquist components set to zero.
  const std::array<std::vector<double>, 3>& kd() const { return kd_; }
  const std::vector<double>& kd_sq() const { return kd_sq_; }
  // Weight of a half-spectrum entry in full-spectrum sums (1 or 2).
  const std::vector<double>& weight() const { return weight_; }
  const std::vector<std::uint8_t>& dealias_mask() const { return mask_; }
  // True where any integer wavenumber component equals -n/2.
  const std::vector<std::uint8_t>& nyquist() const { return nyq_; }

  void forward(std::span<const double> in, std::span<cplx> out) const;
  // Does not modify `in`.
  void inverse(std::span<const cplx> in, std::span<double> out) const;

  Spectrum forward(std::span<const double> in) const;
  std::vector<double> inverse(std::span<const cplx> in) const;

  // sum over the full spectrum of a(k) conj(b(k)) (real part), times L^3:
  // equals the L2 inner product of the corresponding real fields.
  double spectral_inner(std::span<const cplx> a, std::span<const cplx> b) const;

 private:
  int n_;
  int nh_;
  double L_;
  std::size_t real_size_;
  std::size_t spec_size_;
  std::vector<double> xi_sq_;
  std::array<std::vector<double>, 3> kd_;
  std::vector<double> kd_sq_;
  std::vector<double> weight_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> nyq_;
  void* plan_r2c_ = nullptr;
  void* plan_c2r_ = nullptr;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridPtr g);
  ScalarField(GridPtr g, std::vector<double> v);
  static ScalarField constant(GridPtr g, double c);
  static ScalarField sample(GridPtr g, const std::function<double(double, double, double)>& f);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct VectorField {
  GridPtr grid;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(GridPtr g);
  static VectorField sample(GridPtr g, const std::function<Vec3(double, double, double)>& f);
  ScalarField component(int c) const { return ScalarField(grid, comp[c]); }
};

// Row-major 3x3: entry (i,j) at index 3*i + j.
struct TensorField {
  GridPtr grid;
  std::array<std::vector<double>, 9> comp;

  TensorField() = default;
  explicit TensorField(GridPtr g);
  std::vector<double>& at(int i, int j) { return comp[3 * i + j]; }
  const std::vector<double>& at(int i, int j) const { return comp[3 * i + j]; }
};

}  // namespace nsp
