#include "nsplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsplab/errors.hpp"
#include "nsplab/random.hpp"

namespace nsp {

namespace {

const cplx I(0.0, 1.0);

void check_finite(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw InvalidArgument(std::string(what) + ": non-finite value at index " + std::to_string(i));
}

// Hermitian part of mu sampled on the half spectrum.
std::vector<cplx> hermitian_symbol(const SpectralGrid& g, const Multiplier& mu) {
  std::vector<cplx> s(g.spectral_size());
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    const Vec3 xi = g.wavevector(idx);
    const cplx a = mu(xi);
    const auto k = g.mode(idx);
    // lattice partner of -k
    Vec3 xm = xi;
    for (int c = 0; c < 3; ++c)
      if (k[c] != -g.n() / 2) xm[c] = -xi[c];
    const cplx b = mu(xm);
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) ||
        !std::isfinite(b.imag())) {
      throw InvalidArgument("apply_multiplier: multiplier undefined at mode (" + std::to_string(k[0]) + "," +
                            std::to_string(k[1]) + "," + std::to_string(k[2]) + ")");
    }
    s[idx] = 0.5 * (a + std::conj(b));
  }
  return s;
}

}  // namespace

namespace spec {

void gradient(const SpectralGrid& g, std::span<const cplx> a, std::array<Spectrum, 3>& out) {
  const auto& kd = g.kd();
  for (int c = 0; c < 3; ++c) {
    out[c].resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[c][i] = I * kd[c][i] * a[i];
  }
}

void divergence(const SpectralGrid& g, const std::array<Spectrum, 3>& a, Spectrum& out) {
  const auto& kd = g.kd();
  out.resize(a[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = I * (kd[0][i] * a[0][i] + kd[1][i] * a[1][i] + kd[2][i] * a[2][i]);
}

void apply_mask(const SpectralGrid& g, Spectrum& a) {
  const auto& m = g.dealias_mask();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!m[i]) a[i] = 0.0;
}

void zero_nyquist(const SpectralGrid& g, Spectrum& a) {
  const auto& ny = g.nyquist();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (ny[i]) a[i] = 0.0;
}

void leray(const SpectralGrid& g, std::array<Spectrum, 3>& a) {
  const auto& kd = g.kd();
  const auto& k2 = g.kd_sq();
  for (std::size_t i = 0; i < a[0].size(); ++i) {
    if (k2[i] == 0.0) continue;
    const cplx d = (kd[0][i] * a[0][i] + kd[1][i] * a[1][i] + kd[2][i] * a[2][i]) / k2[i];
    for (int c = 0; c < 3; ++c) a[c][i] -= kd[c][i] * d;
  }
}

std::array<Spectrum, 3> forward(const VectorField& v) {
  std::array<Spectrum, 3> out;
  for (int c = 0; c < 3; ++c) out[c] = v.grid->forward(v.comp[c]);
  return out;
}

VectorField inverse(GridPtr g, const std::array<Spectrum, 3>& a) {
  VectorField v(g);
  for (int c = 0; c < 3; ++c) g->inverse(a[c], v.comp[c]);
  return v;
}

}  // namespace spec

void require_finite(const ScalarField& f, const char* what) {
  if (!f.grid) throw InvalidArgument(std::string(what) + ": field has no grid");
  if (f.values.size() != f.grid->real_size()) throw InvalidArgument(std::string(what) + ": shape mismatch");
  check_finite(f.values, what);
}

void require_finite(const VectorField& v, const char* what) {
  if (!v.grid) throw InvalidArgument(std::string(what) + ": field has no grid");
  for (const auto& c : v.comp) {
    if (c.size() != v.grid->real_size()) throw InvalidArgument(std::string(what) + ": shape mismatch");
    check_finite(c, what);
  }
}

ScalarField apply_multiplier(const ScalarField& f, const Multiplier& mu) {
  require_finite(f, "apply_multiplier");
  const auto& g = *f.grid;
  const auto s = hermitian_symbol(g, mu);
  Spectrum a = g.forward(f.values);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s[i];
  return ScalarField(f.grid, g.inverse(a));
}

VectorField apply_multiplier(const VectorField& f, const Multiplier& mu) {
  require_finite(f, "apply_multiplier");
  const auto& g = *f.grid;
  const auto s = hermitian_symbol(g, mu);
  VectorField out(f.grid);
  for (int c = 0; c < 3; ++c) {
    Spectrum a = g.forward(f.comp[c]);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s[i];
    g.inverse(a, out.comp[c]);
  }
  return out;
}

HelmholtzParts helmholtz(const VectorField& v) {
  require_finite(v, "helmholtz");
  const auto& g = *v.grid;
  auto a = spec::forward(v);
  auto p = a;
  spec::leray(g, p);
  std::array<Spectrum, 3> q;
  for (int c = 0; c < 3; ++c) {
    q[c].resize(a[c].size());
    for (std::size_t i = 0; i < a[c].size(); ++i) q[c][i] = a[c][i] - p[c][i];
  }
  return {spec::inverse(v.grid, p), spec::inverse(v.grid, q)};
}

VectorField leray_project(const VectorField& v) { return helmholtz(v).P_part; }
VectorField gradient_project(const VectorField& v) { return helmholtz(v).Q_part; }

ScalarField inverse_laplacian(const ScalarField& f) {
  require_finite(f, "inverse_laplacian");
  const auto& g = *f.grid;
  Spectrum a = g.forward(f.values);
  const auto& k2 = g.xi_sq();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = k2[i] > 0.0 ? -a[i] / k2[i] : cplx(0.0);
  return ScalarField(f.grid, g.inverse(a));
}

VectorField gradient(const ScalarField& f) {
  require_finite(f, "gradient");
  const auto& g = *f.grid;
  Spectrum a = g.forward(f.values);
  std::array<Spectrum, 3> d;
  spec::gradient(g, a, d);
  return spec::inverse(f.grid, d);
}

ScalarField divergence(const VectorField& v) {
  require_finite(v, "divergence");
  const auto& g = *v.grid;
  Spectrum d;
  spec::divergence(g, spec::forward(v), d);
  return ScalarField(v.grid, g.inverse(d));
}

VectorField curl(const VectorField& v) {
  require_finite(v, "curl");
  const auto& g = *v.grid;
  const auto a = spec::forward(v);
  const auto& kd = g.kd();
  std::array<Spectrum, 3> r;
  for (auto& c : r) c.resize(g.spectral_size());
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    r[0][i] = I * (kd[1][i] * a[2][i] - kd[2][i] * a[1][i]);
    r[1][i] = I * (kd[2][i] * a[0][i] - kd[0][i] * a[2][i]);
    r[2][i] = I * (kd[0][i] * a[1][i] - kd[1][i] * a[0][i]);
  }
  return spec::inverse(v.grid, r);
}

ScalarField laplacian(const ScalarField& f) {
  require_finite(f, "laplacian");
  const auto& g = *f.grid;
  Spectrum a = g.forward(f.values);
  const auto& k2 = g.xi_sq();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= -k2[i];
  return ScalarField(f.grid, g.inverse(a));
}

double gaussian_symbol(double kappa, double xi_sq) { return std::exp(-0.5 * kappa * kappa * xi_sq); }

namespace {
void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidArgument("mollifier: kappa must lie in (0,1), got " + std::to_string(kappa));
}
}  // namespace

std::vector<double> mollifier_symbol(const SpectralGrid& g, const MollifierSpec& ms) {
  check_kappa(ms.kappa);
  std::vector<double> s(g.spectral_size());
  if (ms.kind == MollifierKind::GaussianFourier) {
    const auto& k2 = g.xi_sq();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = gaussian_symbol(ms.kappa, k2[i]);
    return s;
  }
  // bump: exp(-1/(1-r^2/kappa^2)) on |x| < kappa, minimum-image distance
  const int n = g.n();
  const double h = g.spacing();
  std::vector<double> ker(g.real_size(), 0.0);
  double mass = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx) {
        const double dx = g.wavenumber(i) * h, dy = g.wavenumber(j) * h, dz = g.wavenumber(l) * h;
        const double q = (dx * dx + dy * dy + dz * dz) / (ms.kappa * ms.kappa);
        if (q < 1.0) {
          ker[idx] = std::exp(-1.0 / (1.0 - q));
          mass += ker[idx];
        }
      }
  if (mass == 0.0) {
    // radius below the grid spacing: the kernel degenerates to the identity
    std::fill(s.begin(), s.end(), 1.0);
    return s;
  }
  for (auto& k : ker) k /= mass;
  const Spectrum kh = g.forward(ker);
  const double N = static_cast<double>(g.real_size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = kh[i].real() * N;
  return s;
}

ScalarField mollify(const ScalarField& f, const MollifierSpec& ms) {
  require_finite(f, "mollify");
  const auto& g = *f.grid;
  const auto s = mollifier_symbol(g, ms);
  Spectrum a = g.forward(f.values);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s[i];
  return ScalarField(f.grid, g.inverse(a));
}

VectorField mollify(const VectorField& f, const MollifierSpec& ms) {
  require_finite(f, "mollify");
  const auto& g = *f.grid;
  const auto s = mollifier_symbol(g, ms);
  VectorField out(f.grid);
  for (int c = 0; c < 3; ++c) {
    Spectrum a = g.forward(f.comp[c]);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s[i];
    g.inverse(a, out.comp[c]);
  }
  return out;
}

double mollifier_inverse_estimate_check(const ScalarField& f, double kappa, double s, double r, double p,
                                        MollifierKind kind) {
  require_finite(f, "mollifier_inverse_estimate_check");
  if (!(s >= 0.0)) throw InvalidArgument("inverse estimate: s must be >= 0");
  if (!(r >= 1.0) || !(p >= 1.0) || r > p || std::isinf(r))
    throw InvalidArgument("inverse estimate: unsupported (r,p) pair; need 1 <= r <= p <= inf with r finite");
  const auto& g = *f.grid;
  const auto sym = mollifier_symbol(g, {kappa, kind});
  const Spectrum a = g.forward(f.values);
  Spectrum sm(a.size()), neg(a.size());
  const auto& k2 = g.xi_sq();
  for (std::size_t i = 0; i < a.size(); ++i) {
    sm[i] = a[i] * sym[i];
    neg[i] = a[i] * std::pow(1.0 + k2[i], -0.5 * s);
  }
  const ScalarField fk(f.grid, g.inverse(sm));
  const ScalarField fneg(f.grid, g.inverse(neg));
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double expo = -s - 3.0 * (1.0 / r - inv_p);
  const double denom = std::pow(kappa, expo) * lp_norm(fneg, r);
  if (denom == 0.0) throw InvalidArgument("inverse estimate: zero field");
  return lp_norm(fk, p) / denom;
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / static_cast<double>(f.values.size());
}

double l2_norm(const ScalarField& f) { return lp_norm(f, 2.0); }
double l2_norm(const VectorField& v) { return lp_norm(v, 2.0); }

double lp_norm(const ScalarField& f, double p) {
  const double dv = f.grid->cell_volume();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f.values) s += v * v;
    return std::sqrt(s * dv);
  }
  for (double v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * dv, 1.0 / p);
}

double lp_norm(const VectorField& v, double p) {
  ScalarField mag(v.grid);
  for (std::size_t i = 0; i < mag.size(); ++i)
    mag[i] = std::sqrt(v.comp[0][i] * v.comp[0][i] + v.comp[1][i] * v.comp[1][i] + v.comp[2][i] * v.comp[2][i]);
  return lp_norm(mag, p);
}

double inner(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid->cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.comp[c].size(); ++i) s += a.comp[c][i] * b.comp[c][i];
  return s * a.grid->cell_volume();
}

namespace {
// Coefficient of mode k for a real random field: canonical representative draws, its
// negative gets the conjugate.
cplx hermitian_draw(std::uint64_t seed, std::array<int, 3> k) {
  bool canonical = true;
  for (int c = 0; c < 3; ++c) {
    if (k[c] > 0) break;
    if (k[c] < 0) {
      canonical = false;
      break;
    }
  }
  std::array<int, 3> kc = k;
  if (!canonical)
    for (auto& x : kc) x = -x;
  const std::uint64_t key = (static_cast<std::uint64_t>(kc[0] + 4096) << 26) |
                            (static_cast<std::uint64_t>(kc[1] + 4096) << 13) | static_cast<std::uint64_t>(kc[2] + 4096);
  const auto z = rng::normal_pair(seed, key, 0x5EED);
  const cplx c(z[0], z[1]);
  return canonical ? c : std::conj(c);
}

Spectrum band_limited_spectrum(const SpectralGrid& g, std::uint64_t seed, int kmax) {
  if (kmax < 1 || 2 * kmax >= g.n()) throw InvalidArgument("random field: kmax must satisfy 1 <= kmax < n/2");
  Spectrum a(g.spectral_size(), 0.0);
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    const auto k = g.mode(idx);
    const int m = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
    if (m >= 1 && m <= kmax) a[idx] = hermitian_draw(seed, k);
  }
  const double nrm = std::sqrt(g.spectral_inner(a, a));
  for (auto& z : a) z /= nrm;
  return a;
}
}  // namespace

ScalarField random_band_limited(GridPtr g, std::uint64_t seed, int kmax) {
  return ScalarField(g, g->inverse(band_limited_spectrum(*g, seed, kmax)));
}

VectorField random_band_limited_vector(GridPtr g, std::uint64_t seed, int kmax) {
  VectorField v(g);
  for (int c = 0; c < 3; ++c) g->inverse(band_limited_spectrum(*g, rng::mix(seed, c), kmax), v.comp[c]);
  return v;
}

}  // namespace nsp
