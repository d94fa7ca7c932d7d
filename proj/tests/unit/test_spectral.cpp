#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nsplab/errors.hpp"
#include "nsplab/spectral.hpp"

using namespace nsp;
namespace {
constexpr double pi = std::numbers::pi;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rel_l2(const VectorField& a, const VectorField& b) {
  VectorField d(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < d.comp[c].size(); ++i) d.comp[c][i] = a.comp[c][i] - b.comp[c][i];
  return l2_norm(d) / l2_norm(a);
}

VectorField sub(const VectorField& a, const VectorField& b) {
  VectorField d(a.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < d.comp[c].size(); ++i) d.comp[c][i] = a.comp[c][i] - b.comp[c][i];
  return d;
}
}  // namespace

TEST_CASE("grid construction and tables") {
  CHECK_THROWS_AS(SpectralGrid(6, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SpectralGrid(9, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SpectralGrid(8, -1.0), InvalidArgument);
  auto g = SpectralGrid::create(16, 2 * pi);
  int zeros = 0;
  for (std::size_t i = 0; i < g->spectral_size(); ++i) {
    auto k = g->mode(i);
    if (k[0] == 0 && k[1] == 0 && k[2] == 0) ++zeros;
    for (int c = 0; c < 3; ++c) {
      CHECK(k[c] >= -8);
      CHECK(k[c] < 8);
      if (3 * std::abs(k[c]) > 16) CHECK(g->dealias_mask()[i] == 0);
    }
  }
  CHECK(zeros == 1);
}

TEST_CASE("transform round trip and Parseval on 32^3") {
  auto g = SpectralGrid::create(32, 2 * pi);
  ScalarField f(g);
  // arbitrary (not band-limited) data including Nyquist content
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(0.37 * i) + 0.1 * std::cos(1.3 * i * i);
  const auto a = g->forward(f.values);
  const auto back = g->inverse(a);
  CHECK(max_abs_diff(back, f.values) <= 1e-12 * lp_norm(f, kInfinity));
  const double phys = l2_norm(f);
  const double spec = std::sqrt(g->spectral_inner(a, a));
  CHECK(std::abs(phys - spec) <= 1e-10 * phys);
}

TEST_CASE("apply_multiplier examples") {
  const double L = 3.0;
  auto g = SpectralGrid::create(16, L);
  auto f = ScalarField::sample(g, [&](double x, double, double) { return std::cos(2 * pi * x / L); });
  auto id = apply_multiplier(f, [](const Vec3&) { return cplx(1.0); });
  CHECK(max_abs_diff(id.values, f.values) <= 1e-13);

  auto lap = apply_multiplier(f, [](const Vec3& xi) { return cplx(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])); });
  const double k = 2 * pi / L;
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(lap[i] == doctest::Approx(-k * k * f[i]).epsilon(1e-12));

  auto r = random_band_limited(g, 7, 5);
  for (auto& v : r.values) v += 0.3;  // nonzero mean
  auto up = apply_multiplier(r, [](const Vec3& xi) { return cplx(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); });
  auto down = apply_multiplier(up, [](const Vec3& xi) {
    const double s = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return cplx(s == 0.0 ? 0.0 : 1.0 / s);
  });
  const double m = mean(r);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(down[i] == doctest::Approx(r[i] - m).epsilon(1e-10).scale(1.0));
}

TEST_CASE("apply_multiplier rejects bad input") {
  auto g = SpectralGrid::create(8, 2 * pi);
  ScalarField f(g);
  CHECK_THROWS_AS(apply_multiplier(f, [](const Vec3& xi) { return cplx(1.0 / (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])); }),
                  InvalidArgument);
  f[3] = std::nan("");
  CHECK_THROWS_AS(apply_multiplier(f, [](const Vec3&) { return cplx(1.0); }), InvalidArgument);
}

TEST_CASE("multiplier composition and linearity") {
  auto g = SpectralGrid::create(16, 2 * pi);
  auto f = random_band_limited(g, 3, 6);
  auto h = random_band_limited(g, 4, 6);
  Multiplier m1 = [](const Vec3& xi) { return cplx(std::exp(-0.1 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]))); };
  Multiplier m2 = [](const Vec3& xi) { return cplx(0.0, xi[1]); };
  auto a = apply_multiplier(apply_multiplier(f, m2), m1);
  auto b = apply_multiplier(f, [&](const Vec3& xi) { return m1(xi) * m2(xi); });
  CHECK(max_abs_diff(a.values, b.values) <= 1e-12 * lp_norm(b, kInfinity));

  ScalarField s(g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 2.0 * f[i] - 3.0 * h[i];
  auto ls = apply_multiplier(s, m1);
  auto lf = apply_multiplier(f, m1), lh = apply_multiplier(h, m1);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(ls[i] == doctest::Approx(2.0 * lf[i] - 3.0 * lh[i]).scale(1.0).epsilon(1e-12));
}

TEST_CASE("helmholtz examples") {
  auto g = SpectralGrid::create(16, 2 * pi);
  auto grad = VectorField::sample(g, [](double x, double, double) { return Vec3{std::cos(x), 0.0, 0.0}; });
  auto hp = helmholtz(grad);
  CHECK(rel_l2(grad, hp.Q_part) <= 1e-10);
  CHECK(l2_norm(hp.P_part) <= 1e-10 * l2_norm(grad));

  // psi = sin x sin y; v = (d2 psi, -d1 psi, 0)
  auto rot = VectorField::sample(g, [](double x, double y, double) {
    return Vec3{std::sin(x) * std::cos(y), -std::cos(x) * std::sin(y), 0.0};
  });
  auto hr = helmholtz(rot);
  CHECK(rel_l2(rot, hr.P_part) <= 1e-10);
  CHECK(l2_norm(hr.Q_part) <= 1e-10 * l2_norm(rot));

  auto cst = VectorField::sample(g, [](double, double, double) { return Vec3{1.0, -2.0, 0.5}; });
  auto hc = helmholtz(cst);
  CHECK(rel_l2(cst, hc.P_part) <= 1e-12);
}

TEST_CASE("helmholtz invariants on random fields, 32^3") {
  auto g = SpectralGrid::create(32, 2 * pi);
  VectorField v(g);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < v.comp[c].size(); ++i) v.comp[c][i] = std::sin(0.11 * i + c) + std::cos(0.013 * i * (c + 1));
  auto h = helmholtz(v);
  const double vv = inner(v, v);
  CHECK(std::abs(inner(h.P_part, h.Q_part)) <= 1e-10 * vv);
  VectorField sum(g);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < sum.comp[c].size(); ++i) sum.comp[c][i] = h.P_part.comp[c][i] + h.Q_part.comp[c][i];
  CHECK(rel_l2(v, sum) <= 1e-12);
  auto pp = helmholtz(h.P_part);
  auto qq = helmholtz(h.Q_part);
  CHECK(rel_l2(h.P_part, pp.P_part) <= 1e-10);
  CHECK(rel_l2(h.Q_part, qq.Q_part) <= 1e-10);
  CHECK(l2_norm(qq.P_part) <= 1e-10 * l2_norm(h.Q_part));
  CHECK(l2_norm(divergence(h.P_part)) <= 1e-10 * l2_norm(h.P_part));
  CHECK(l2_norm(curl(h.Q_part)) <= 1e-10 * l2_norm(h.Q_part));
}

TEST_CASE("inverse laplacian") {
  const double L = 2 * pi;
  auto g = SpectralGrid::create(16, L);
  auto f = ScalarField::sample(g, [](double x, double, double) { return std::cos(x); });
  auto u = inverse_laplacian(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(u[i] == doctest::Approx(-f[i]).scale(1.0).epsilon(1e-13));
  auto c = inverse_laplacian(ScalarField::constant(g, 4.2));
  CHECK(lp_norm(c, kInfinity) == 0.0);

  ScalarField r(g);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sin(0.7 * i) + 0.2;
  auto gr = inverse_laplacian(r);
  CHECK(std::abs(mean(gr)) <= 1e-14);
  auto lap = laplacian(gr);
  const double m = mean(r);
  ScalarField res(g);
  // residual only on the non-Nyquist content: the Laplacian uses the true |xi|^2
  for (std::size_t i = 0; i < r.size(); ++i) res[i] = lap[i] - (r[i] - m);
  CHECK(l2_norm(res) <= 1e-9 * l2_norm(r));
}

TEST_CASE("mollifier contracts") {
  auto g = SpectralGrid::create(32, 2 * pi);
  CHECK_THROWS_AS(mollify(ScalarField(g), {1.0}), InvalidArgument);
  CHECK_THROWS_AS(mollify(ScalarField(g), {0.0}), InvalidArgument);
  for (auto kind : {MollifierKind::GaussianFourier, MollifierKind::BumpFourier}) {
    auto c = mollify(ScalarField::constant(g, 2.5), {0.4, kind});
    for (double v : c.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));

    auto f = ScalarField::sample(g, [](double x, double y, double) { return std::cos(2 * x + 3 * y); });
    const auto sym = mollifier_symbol(*g, {0.4, kind});
    // find mode (2,3,0)
    std::size_t idx = (std::size_t(2) * 32 + 3) * 17;
    CHECK(sym[idx] < 1.0);
    auto fm = mollify(f, {0.4, kind});
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(fm[i] == doctest::Approx(sym[idx] * f[i]).scale(1.0).epsilon(1e-12));

    auto r = random_band_limited(g, 11, 10);
    auto rm = mollify(r, {0.3, kind});
    CHECK(l2_norm(rm) <= l2_norm(r));
    CHECK(std::abs(mean(rm) - mean(r)) <= 1e-14);
  }
  CHECK(gaussian_symbol(0.5, 4.0) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("bump kernel is nonnegative with unit mass") {
  auto g = SpectralGrid::create(32, 2 * pi);
  const auto sym = mollifier_symbol(*g, {0.8, MollifierKind::BumpFourier});
  CHECK(sym[0] == doctest::Approx(1.0).epsilon(1e-13));
  for (double s : sym) CHECK(std::abs(s) <= 1.0 + 1e-13);
  // recover kernel values from the symbol: all >= 0
  Spectrum a(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) a[i] = sym[i] / double(g->real_size());
  auto ker = g->inverse(a);
  for (double k : ker) CHECK(k >= -1e-15);
}

TEST_CASE("mollifier inverse estimate check") {
  auto g = SpectralGrid::create(32, 2 * pi);
  auto r = random_band_limited(g, 5, 8);
  CHECK(mollifier_inverse_estimate_check(r, 0.3, 0.0, 2.0, 2.0) <= 1.0);
  CHECK_THROWS_AS(mollifier_inverse_estimate_check(r, 0.3, 0.0, 3.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(mollifier_inverse_estimate_check(r, 0.3, 0.0, 0.5, 2.0), InvalidArgument);
  CHECK_THROWS_AS(mollifier_inverse_estimate_check(r, 0.3, -1.0, 2.0, 2.0), InvalidArgument);
  CHECK_NOTHROW(mollifier_inverse_estimate_check(r, 0.3, 0.0, 2.0, kInfinity));

  // closed form for a single mode: ratio = symbol(xi0) * kappa * sqrt(1 + xi0^2)
  auto f = ScalarField::sample(g, [](double x, double y, double z) { return std::cos(3 * x + 1 * y - 2 * z); });
  const double xi2 = 14.0, kap = 0.25;
  const double expect = gaussian_symbol(kap, xi2) * kap * std::sqrt(1.0 + xi2);
  CHECK(mollifier_inverse_estimate_check(f, kap, 1.0, 2.0, 2.0) == doctest::Approx(expect).epsilon(1e-11));

  // bounded ratio sequence as kappa halves, 8 band-limited fields
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto rf = random_band_limited(g, 100 + s, 6);
    double first = 0.0, worst = 0.0;
    double kap2 = 0.8;
    for (int j = 0; j < 4; ++j, kap2 *= 0.5) {
      const double q = mollifier_inverse_estimate_check(rf, kap2, 1.0, 2.0, 2.0);
      if (j == 0) first = q;
      worst = std::max(worst, q);
    }
    CHECK(worst <= 1.5 * std::max(first, 1.0));
  }
}

TEST_CASE("random band-limited fields are deterministic and grid-independent") {
  auto g16 = SpectralGrid::create(16, 2 * pi);
  auto g32 = SpectralGrid::create(32, 2 * pi);
  auto a = random_band_limited(g16, 42, 4);
  auto b = random_band_limited(g16, 42, 4);
  CHECK(a.values == b.values);
  auto c = random_band_limited(g32, 42, 4);
  // sample the 16-grid points out of the 32-grid field
  double md = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int l = 0; l < 16; ++l)
        md = std::max(md, std::abs(a[(i * 16 + j) * 16 + l] - c[(2 * i * 32 + 2 * j) * 32 + 2 * l]));
  CHECK(md <= 1e-12);
  CHECK(l2_norm(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(mean(a)) <= 1e-15);
}

TEST_CASE("vector calculus identities") {
  auto g = SpectralGrid::create(16, 2 * pi);
  auto phi = random_band_limited(g, 9, 5);
  CHECK(l2_norm(curl(gradient(phi))) <= 1e-12 * l2_norm(gradient(phi)));
  auto v = random_band_limited_vector(g, 10, 5);
  CHECK(l2_norm(divergence(curl(v))) <= 1e-12 * l2_norm(curl(v)));
  auto d = sub(gradient(phi), gradient(phi));
  CHECK(l2_norm(d) == 0.0);
}
