#include "nsplab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsplab/errors.hpp"
#include "nsplab/random.hpp"

namespace nsp {

void NoiseSpec::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("NoiseSpec: " + m); };
  if (K < 0) fail("K must be >= 0");
  if (!(decay_power > 0.5)) fail("decay_power must exceed 1/2 for square summability");
  if (!(box_lo > 0.0 && box_hi < 1.0 && box_lo < box_hi)) fail("support box must satisfy 0 < lo < hi < 1");
  if (!(alpha_scale >= 0.0) || !(b_scale >= 0.0)) fail("amplitude scales must be >= 0");
}

namespace {
double bump1d(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }
}  // namespace

NoiseModel::NoiseModel(GridPtr grid, const NoiseSpec& spec) : grid_(std::move(grid)), spec_(spec), K_(spec.K) {
  spec_.validate();
  a_.resize(K_ + 1, 0.0);
  alpha_.resize(K_ + 1, 0.0);
  v_.resize(K_ + 1, Vec3{0, 0, 0});
  B_.resize(K_ + 1, Mat3{});
  const std::uint64_t s = spec.mixing_seed;
  for (int k = 1; k <= K_; ++k) {
    a_[k] = std::pow(static_cast<double>(k), -spec.decay_power);
    alpha_[k] = spec.alpha_scale * (0.5 + rng::uniform_pair(s, k, 0)[0]);
    const auto z0 = rng::normal_pair(s, k, 1);
    const auto z1 = rng::normal_pair(s, k, 2);
    Vec3 v{z0[0], z0[1], z1[0]};
    const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& c : v) c /= nv;
    v_[k] = v;
    for (int e = 0; e < 9; e += 2) {
      const auto z = rng::normal_pair(s, k, 3 + e);
      B_[k][e] = spec.b_scale * z[0] / 3.0;
      if (e + 1 < 9) B_[k][e + 1] = spec.b_scale * z[1] / 3.0;
    }
  }
  for (int k = 1; k <= K_; ++k) {
    const double a2 = a_[k] * a_[k];
    double bf = 0.0;
    for (double b : B_[k]) bf += b * b;
    c_growth_ += 2.0 * a2 * (alpha_[k] * alpha_[k] + bf);
    sA_ += a2 * alpha_[k] * alpha_[k];
    for (int j = 0; j < 3; ++j) {
      double t = 0.0;
      for (int i = 0; i < 3; ++i) t += B_[k][3 * i + j] * v_[k][i];
      sb_[j] += a2 * alpha_[k] * t;
      for (int l = 0; l < 3; ++l) {
        double c = 0.0;
        for (int i = 0; i < 3; ++i) c += B_[k][3 * i + j] * B_[k][3 * i + l];
        sC_[3 * j + l] += a2 * c;
      }
    }
  }
  const double L = grid_->box_length();
  const double lo = spec.box_lo * L, hi = spec.box_hi * L;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const int n = grid_->n();
  std::vector<double> b1(n);
  for (int i = 0; i < n; ++i) b1[i] = bump1d((grid_->coordinate(i) - mid) / half);
  chi_ = ScalarField(grid_);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) chi_[idx++] = b1[i] * b1[j] * b1[l];
}

int NoiseModel::check(int k) const {
  if (k < 1 || k > K_) throw InvalidArgument("noise mode index " + std::to_string(k) + " outside 1.." + std::to_string(K_));
  return k;
}

VectorField NoiseModel::evaluate_diffusion(const FluidState& s, int k) const {
  check(k);
  VectorField g(grid_);
  const auto& v = v_[k];
  const auto& B = B_[k];
  for (std::size_t i = 0; i < grid_->real_size(); ++i) {
    const double c = chi_[i] * a_[k];
    if (c == 0.0) continue;
    const double r = s.rho[i];
    const double m0 = s.momentum.comp[0][i], m1 = s.momentum.comp[1][i], m2 = s.momentum.comp[2][i];
    for (int d = 0; d < 3; ++d)
      g.comp[d][i] = c * (alpha_[k] * r * v[d] + B[3 * d] * m0 + B[3 * d + 1] * m1 + B[3 * d + 2] * m2);
  }
  return g;
}

void NoiseModel::apply_raw(const double* rho, const std::array<const double*, 3>& m, std::span<const double> dbeta,
                           const std::array<double*, 3>& out) const {
  if (static_cast<int>(dbeta.size()) != K_)
    throw InvalidArgument("apply_noise: increment has " + std::to_string(dbeta.size()) + " modes, model has " + std::to_string(K_));
  Vec3 c{0, 0, 0};
  Mat3 Bs{};
  for (int k = 1; k <= K_; ++k) {
    const double w = a_[k] * dbeta[k - 1];
    for (int d = 0; d < 3; ++d) c[d] += w * alpha_[k] * v_[k][d];
    for (int e = 0; e < 9; ++e) Bs[e] += w * B_[k][e];
  }
  const std::size_t N = grid_->real_size();
  for (std::size_t i = 0; i < N; ++i) {
    const double x = chi_[i];
    if (x == 0.0) {
      out[0][i] = out[1][i] = out[2][i] = 0.0;
      continue;
    }
    const double r = rho ? rho[i] : 1.0;
    const double m0 = m[0][i], m1 = m[1][i], m2 = m[2][i];
    for (int d = 0; d < 3; ++d) out[d][i] = x * (r * c[d] + Bs[3 * d] * m0 + Bs[3 * d + 1] * m1 + Bs[3 * d + 2] * m2);
  }
}

void NoiseModel::square_sum_raw(const double* rho, const std::array<const double*, 3>& m, double* out) const {
  const std::size_t N = grid_->real_size();
  for (std::size_t i = 0; i < N; ++i) {
    const double x = chi_[i];
    if (x == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double r = rho ? rho[i] : 1.0;
    const double mm[3] = {m[0][i], m[1][i], m[2][i]};
    double q = r * r * sA_;
    for (int j = 0; j < 3; ++j) {
      q += 2.0 * r * sb_[j] * mm[j];
      for (int l = 0; l < 3; ++l) q += mm[j] * sC_[3 * j + l] * mm[l];
    }
    out[i] = x * x * q;
  }
}

std::pair<double, double> NoiseModel::growth_bound_check(const FluidState& s) const {
  const std::size_t N = grid_->real_size();
  std::vector<double> q(N);
  square_sum_raw(s.rho.values.data(), {s.momentum.comp[0].data(), s.momentum.comp[1].data(), s.momentum.comp[2].data()},
                 q.data());
  double r1 = 0.0, cmax = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double den = s.rho[i] * s.rho[i];
    for (int c = 0; c < 3; ++c) den += s.momentum.comp[c][i] * s.momentum.comp[c][i];
    if (den > 0.0) r1 = std::max(r1, q[i] / den);
    cmax = std::max(cmax, chi_[i] * chi_[i]);
  }
  // d g_k / d rho = chi a alpha v, d g_k / d m = chi a B: squared sum independent of the state
  double d = 0.0;
  for (int k = 1; k <= K_; ++k) {
    double bf = 0.0;
    for (double b : B_[k]) bf += b * b;
    d += a_[k] * a_[k] * (alpha_[k] * alpha_[k] + bf);
  }
  return {r1, cmax * d};
}

VectorField NoiseModel::apply_noise(const FluidState& s, const WienerIncrement& inc) const {
  VectorField out(grid_);
  apply_raw(s.rho.values.data(), {s.momentum.comp[0].data(), s.momentum.comp[1].data(), s.momentum.comp[2].data()},
            inc.dbeta, {out.comp[0].data(), out.comp[1].data(), out.comp[2].data()});
  return out;
}

WienerPath::WienerPath(std::uint64_t seed, int K, double base_dt) : seed_(seed), K_(K), dt_(base_dt) {
  if (K < 0) throw InvalidArgument("WienerPath: K must be >= 0");
  if (!(base_dt > 0.0)) throw InvalidArgument("WienerPath: dt must be positive");
}

namespace {
std::uint64_t key_b(int k, int level, std::int64_t index) {
  return (static_cast<std::uint64_t>(k) << 48) | (static_cast<std::uint64_t>(level) << 40) |
         (static_cast<std::uint64_t>(index) & ((1ull << 40) - 1));
}
}  // namespace

double WienerPath::bridge(std::int64_t step, int k, int level, std::int64_t index) const {
  if (level == 0) return std::sqrt(dt_) * rng::normal(seed_, static_cast<std::uint64_t>(step), key_b(k, 0, 0));
  const std::int64_t parent_index = index / 2;
  const double parent = bridge(step, k, level - 1, parent_index);
  const double z = rng::normal(seed_, static_cast<std::uint64_t>(step), key_b(k, level, parent_index));
  const double left = 0.5 * parent + std::sqrt(dt_ / std::ldexp(1.0, level + 1)) * z;
  return (index % 2 == 0) ? left : parent - left;
}

WienerIncrement WienerPath::sample_increment(std::int64_t step) const {
  WienerIncrement w;
  w.dt = dt_;
  w.dbeta.resize(K_);
  for (int k = 1; k <= K_; ++k) w.dbeta[k - 1] = bridge(step, k, 0, 0);
  return w;
}

WienerIncrement WienerPath::aggregate(std::int64_t first, std::int64_t count) const {
  if (count < 1) throw InvalidArgument("WienerPath::aggregate: count must be >= 1");
  WienerIncrement w;
  w.dt = dt_ * static_cast<double>(count);
  w.dbeta.assign(K_, 0.0);
  for (std::int64_t s = first; s < first + count; ++s)
    for (int k = 1; k <= K_; ++k) w.dbeta[k - 1] += bridge(s, k, 0, 0);
  return w;
}

WienerIncrement WienerPath::refine(std::int64_t step, int level, std::int64_t index) const {
  if (level < 0 || level > 30 || index < 0 || index >= (std::int64_t(1) << level))
    throw InvalidArgument("WienerPath::refine: bad level/index");
  WienerIncrement w;
  w.dt = std::ldexp(dt_, -level);
  w.dbeta.resize(K_);
  for (int k = 1; k <= K_; ++k) w.dbeta[k - 1] = bridge(step, k, level, index);
  return w;
}

WienerIncrement WienerPath::coarse_piece(std::int64_t first, std::int64_t stride, std::int64_t pieces,
                                         std::int64_t piece) const {
  auto pow2 = [](std::int64_t x) { return x > 0 && (x & (x - 1)) == 0; };
  if (!pow2(stride) || !pow2(pieces) || piece < 0 || piece >= pieces)
    throw InvalidArgument("WienerPath::coarse_piece: stride and pieces must be powers of two");
  if (pieces <= stride) {
    const std::int64_t w = stride / pieces;
    return aggregate(first + piece * w, w);
  }
  const std::int64_t per = pieces / stride;  // pieces per base step
  int level = 0;
  while ((std::int64_t(1) << level) < per) ++level;
  return refine(first + piece / per, level, piece % per);
}

}  // namespace nsp
