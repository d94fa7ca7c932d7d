#include "nsplab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "nsplab/errors.hpp"

namespace nsp {

namespace {
// FFTW's planner is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralGrid::SpectralGrid(int n, double box_length) : n_(n), nh_(n / 2 + 1), L_(box_length) {
  if (n < 8 || n % 2 != 0) throw InvalidArgument("grid: n must be even and >= 8, got " + std::to_string(n));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidArgument("grid: box length must be positive and finite");
  real_size_ = static_cast<std::size_t>(n) * n * n;
  spec_size_ = static_cast<std::size_t>(n) * n * nh_;

  xi_sq_.resize(spec_size_);
  kd_sq_.resize(spec_size_);
  weight_.resize(spec_size_);
  mask_.resize(spec_size_);
  nyq_.resize(spec_size_);
  for (auto& v : kd_) v.resize(spec_size_);

  const double k0 = 2.0 * std::numbers::pi / L_;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < nh_; ++l) {
        const std::size_t idx = (static_cast<std::size_t>(i) * n + j) * nh_ + l;
        const int k[3] = {wavenumber(i), wavenumber(j), l < n / 2 ? l : -n / 2};
        double s = 0.0, sd = 0.0;
        bool any_nyq = false, keep = true;
        for (int c = 0; c < 3; ++c) {
          const double x = k0 * k[c];
          s += x * x;
          const bool ny = (k[c] == -n / 2);
          any_nyq = any_nyq || ny;
          kd_[c][idx] = ny ? 0.0 : x;
          sd += ny ? 0.0 : x * x;
          if (3 * std::abs(k[c]) >= n) keep = false;
        }
        xi_sq_[idx] = s;
        kd_sq_[idx] = sd;
        nyq_[idx] = any_nyq ? 1 : 0;
        mask_[idx] = keep ? 1 : 0;
        weight_[idx] = (l == 0 || l == n / 2) ? 1.0 : 2.0;
      }

  std::vector<double> r(real_size_);
  std::vector<cplx> c(spec_size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_r2c_ = fftw_plan_dft_r2c_3d(n, n, n, r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_c2r_ = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_r2c_ || !plan_c2r_) throw std::runtime_error("grid: FFT planning failed");
}

SpectralGrid::~SpectralGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_r2c_) fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
  if (plan_c2r_) fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
}

std::shared_ptr<const SpectralGrid> SpectralGrid::create(int n, double box_length) {
  return std::make_shared<const SpectralGrid>(n, box_length);
}

double SpectralGrid::cell_volume() const {
  const double h = spacing();
  return h * h * h;
}

std::array<int, 3> SpectralGrid::mode(std::size_t idx) const {
  const int l = static_cast<int>(idx % nh_);
  const std::size_t ij = idx / nh_;
  const int j = static_cast<int>(ij % n_);
  const int i = static_cast<int>(ij / n_);
  return {wavenumber(i), wavenumber(j), l < n_ / 2 ? l : -n_ / 2};
}

Vec3 SpectralGrid::wavevector(std::size_t idx) const {
  const auto k = mode(idx);
  const double k0 = 2.0 * std::numbers::pi / L_;
  return {k0 * k[0], k0 * k[1], k0 * k[2]};
}

std::size_t SpectralGrid::conjugate_index(std::size_t idx) const {
  const std::size_t l = idx % nh_;
  const std::size_t ij = idx / nh_;
  const std::size_t j = ij % n_;
  const std::size_t i = ij / n_;
  const std::size_t ic = (n_ - i) % n_;
  const std::size_t jc = (n_ - j) % n_;
  return (ic * n_ + jc) * nh_ + l;
}

void SpectralGrid::forward(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != real_size_ || out.size() != spec_size_) throw InvalidArgument("forward: size mismatch");
  // r2c does not modify its input with FFTW_ESTIMATE out-of-place plans.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double s = 1.0 / static_cast<double>(real_size_);
  for (auto& z : out) z *= s;
}

void SpectralGrid::inverse(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != spec_size_ || out.size() != real_size_) throw InvalidArgument("inverse: size mismatch");
  // c2r destroys its input.
  std::vector<cplx> tmp(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), reinterpret_cast<fftw_complex*>(tmp.data()),
                       out.data());
}

Spectrum SpectralGrid::forward(std::span<const double> in) const {
  Spectrum out(spec_size_);
  forward(in, out);
  return out;
}

std::vector<double> SpectralGrid::inverse(std::span<const cplx> in) const {
  std::vector<double> out(real_size_);
  inverse(in, out);
  return out;
}

double SpectralGrid::spectral_inner(std::span<const cplx> a, std::span<const cplx> b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < spec_size_; ++i) s += weight_[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return s * volume();
}

ScalarField::ScalarField(GridPtr g) : grid(std::move(g)) { values.assign(grid->real_size(), 0.0); }

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->real_size()) throw InvalidArgument("ScalarField: shape does not match grid");
}

ScalarField ScalarField::constant(GridPtr g, double c) {
  ScalarField f(std::move(g));
  std::fill(f.values.begin(), f.values.end(), c);
  return f;
}

ScalarField ScalarField::sample(GridPtr g, const std::function<double(double, double, double)>& fn) {
  ScalarField f(g);
  const int n = g->n();
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) f.values[idx++] = fn(g->coordinate(i), g->coordinate(j), g->coordinate(l));
  return f;
}

VectorField::VectorField(GridPtr g) : grid(std::move(g)) {
  for (auto& c : comp) c.assign(grid->real_size(), 0.0);
}

VectorField VectorField::sample(GridPtr g, const std::function<Vec3(double, double, double)>& fn) {
  VectorField f(g);
  const int n = g->n();
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx) {
        const Vec3 v = fn(g->coordinate(i), g->coordinate(j), g->coordinate(l));
        for (int c = 0; c < 3; ++c) f.comp[c][idx] = v[c];
      }
  return f;
}

TensorField::TensorField(GridPtr g) : grid(std::move(g)) {
  for (auto& c : comp) c.assign(grid->real_size(), 0.0);
}

}  // namespace nsp
