#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nsplab/fluid_model.hpp"
#include "nsplab/grid.hpp"

namespace nsp {

using Mat3 = std::array<double, 9>;  // row-major

struct NoiseSpec {
  int K = 16;
  double decay_power = 2.0;  // a_k = k^-decay_power
  double box_lo = 0.25;      // support sub-box [lo L, hi L]^3
  double box_hi = 0.75;
  std::uint64_t mixing_seed = 1;
  double alpha_scale = 1.0;
  double b_scale = 0.05;

  void validate() const;
};

struct WienerIncrement {
  std::vector<double> dbeta;
  double dt = 0.0;
};

// g_k(x) = chi(x) a_k (alpha_k rho v_k + B_k m), k = 1..K.
class NoiseModel {
 public:
  NoiseModel(GridPtr grid, const NoiseSpec& spec);

  int mode_count() const { return K_; }
  const NoiseSpec& spec() const { return spec_; }
  double coefficient(int k) const { return a_.at(check(k)); }
  double alpha(int k) const { return alpha_.at(check(k)); }
  const Vec3& direction(int k) const { return v_.at(check(k)); }
  const Mat3& mixing_matrix(int k) const { return B_.at(check(k)); }
  const ScalarField& support_bump() const { return chi_; }
  // 2 sum a_k^2 (alpha_k^2 + ||B_k||_F^2)
  double growth_constant() const { return c_growth_; }

  VectorField evaluate_diffusion(const FluidState& s, int k) const;
  // (max_x sum|g_k|^2/(rho^2+|m|^2), max_x sum|grad_{rho,m} g_k|^2)
  std::pair<double, double> growth_bound_check(const FluidState& s) const;
  VectorField apply_noise(const FluidState& s, const WienerIncrement& inc) const;

  // Pointwise kernels used by the solvers. rho == nullptr means rho = 1.
  void apply_raw(const double* rho, const std::array<const double*, 3>& m, std::span<const double> dbeta,
                 const std::array<double*, 3>& out) const;
  // out[i] = sum_k |g_k(x_i)|^2
  void square_sum_raw(const double* rho, const std::array<const double*, 3>& m, double* out) const;

 private:
  int check(int k) const;
  GridPtr grid_;
  NoiseSpec spec_;
  int K_;
  std::vector<double> a_, alpha_;
  std::vector<Vec3> v_;
  std::vector<Mat3> B_;
  ScalarField chi_;
  double c_growth_ = 0.0;
  // closed-form pieces of sum_k |g_k|^2
  double sA_ = 0.0;
  Vec3 sb_{};  // sum a^2 alpha B^T v
  Mat3 sC_{};  // sum a^2 B^T B
};

// Counter-based Wiener path on a base grid of step base_dt. Increments are keyed by
// (seed, base step, k); finer pieces come from Brownian-bridge refinement.
class WienerPath {
 public:
  WienerPath(std::uint64_t seed, int K, double base_dt);

  std::uint64_t seed() const { return seed_; }
  int mode_count() const { return K_; }
  double base_dt() const { return dt_; }

  WienerIncrement sample_increment(std::int64_t step) const;
  // Sum of base increments [first, first+count).
  WienerIncrement aggregate(std::int64_t first, std::int64_t count) const;
  // Piece `index` of base step `step` split into 2^level equal parts.
  WienerIncrement refine(std::int64_t step, int level, std::int64_t index) const;
  // Increment for sub-step `piece` of `pieces` equal parts of the coarse interval
  // [first, first+stride) base steps; pieces and stride are powers of two.
  WienerIncrement coarse_piece(std::int64_t first, std::int64_t stride, std::int64_t pieces, std::int64_t piece) const;

 private:
  double bridge(std::int64_t step, int k, int level, std::int64_t index) const;
  std::uint64_t seed_;
  int K_;
  double dt_;
};

}  // namespace nsp
