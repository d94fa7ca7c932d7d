#include <cmath>
#include <numbers>

#include "nsplab/acoustic.hpp"
#include "nsplab/errors.hpp"
#include "nsplab/harness.hpp"

namespace nsp {

std::vector<MultiplierRow> verify_multiplier_bounds(int n, double L, const std::vector<double>& gammas,
                                                    const std::vector<double>& eps_betas) {
  if (n < 2 || !(L > 0.0)) throw InvalidArgument("verify_multiplier_bounds: bad lattice");
  // Full lattice, each mode once: integer vectors in [-n/2, n/2)^3.
  std::vector<double> xi_sq;
  const double k0 = 2.0 * std::numbers::pi / L;
  for (int a = -n / 2; a < n / 2; ++a)
    for (int b = -n / 2; b < n / 2; ++b)
      for (int c = -n / 2; c < n / 2; ++c)
        if (a || b || c) xi_sq.push_back(k0 * k0 * double(a * a + b * b + c * c));

  std::vector<MultiplierRow> rows;
  for (double gamma : gammas)
    for (double eb : eps_betas) {
      if (!(gamma > 0.0) || !(eb > 0.0 && eb < 1.0)) throw InvalidArgument("verify_multiplier_bounds: bad parameters");
      KGParams p{eb, gamma, 1.0};
      MultiplierRow r{gamma, eb};
      const double bound_A = 1.0 / (gamma + 1.0), bound_B = 1.0 / gamma, bound_n = (gamma + 1.0) / (eb * eb);
      for (double x2 : xi_sq) {
        const double x = std::sqrt(x2);
        if (x <= eb) {
          ++r.modes_outside;
          continue;
        }
        const double m = kg_multiplier_m(x2, p), nn = kg_multiplier_n(x2, p);
        if (x <= 1.0) {
          ++r.modes_A;
          r.max_m_A = std::max(r.max_m_A, m);
          if (m > bound_A + 1e-12) ++r.violations;
        } else {
          ++r.modes_B;
          r.max_m_B = std::max(r.max_m_B, m);
          if (!(m < bound_B)) ++r.violations;
        }
        r.max_n = std::max(r.max_n, nn);
        if (!(nn < bound_n)) ++r.violations;
        const double e = std::abs(nn * m - eb) / eb;
        r.max_nm_error = std::max(r.max_nm_error, e);
        if (e > 1e-12) ++r.violations;
      }
      rows.push_back(r);
    }
  return rows;
}

std::vector<MultiplierRow> default_multiplier_table() {
  return verify_multiplier_bounds(32, 16.0 * std::numbers::pi, {1.5 + 1e-9, 2.0, 3.0}, {0.5, 0.25, 0.1});
}

std::string multipliers_csv(const std::vector<MultiplierRow>& rows) {
  std::string out = "gamma,eps_beta,modes_A,modes_B,modes_outside,max_m_A,max_m_B,max_n,max_nm_error,violations\n";
  for (const auto& r : rows)
    out += format_double(r.gamma) + "," + format_double(r.eps_beta) + "," + std::to_string(r.modes_A) + "," +
           std::to_string(r.modes_B) + "," + std::to_string(r.modes_outside) + "," + format_double(r.max_m_A) + "," +
           format_double(r.max_m_B) + "," + format_double(r.max_n) + "," + format_double(r.max_nm_error) + "," +
           std::to_string(r.violations) + "\n";
  return out;
}

}  // namespace nsp
