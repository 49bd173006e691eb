#include "memristor/statistics.hpp"

#include "memristor/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace memristor {

namespace {

constexpr double kTableLo = -2.0;
constexpr double kTableHi = 40.0;
constexpr int kTableDegree = 20;

// Logistic factor 1/(1+e^{s-z}), stable for either sign of s - z.
double fermi_factor(double s, double z) {
  if (s > z) {
    const double e = std::exp(z - s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s - z));
}

double fd_series(double j, double z) {
  // sum_{k>=1} (-1)^{k+1} e^{kz} / k^{j+1}, convergent for z < 0.
  const double x = std::exp(z);
  double power = x;
  double sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double term = power / std::pow(static_cast<double>(k), j + 1.0);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18 * sum) break;
    power *= x;
  }
  return sum;
}

// 2 eta(2n) for n = 1..39, eta the Dirichlet eta function.
const std::array<double, 40>& sommerfeld_eta() {
  static const std::array<double, 40> table = [] {
    std::array<double, 40> t{};
    for (int n = 1; n < 40; ++n) {
      t[static_cast<std::size_t>(n)] = 2.0 * (1.0 - std::pow(2.0, 1.0 - 2.0 * n)) * std::riemann_zeta(2.0 * n);
    }
    return t;
  }();
  return table;
}

double fd_sommerfeld(double j, double z) {
  // z^{j+1}/Gamma(j+2) [1 + sum_n 2 eta(2n) Gamma(j+2)/Gamma(j+2-2n) z^{-2n}].
  // The oscillatory cos(pi j) F_j(-z) correction vanishes for half-integer j.
  const double inv_z2 = 1.0 / (z * z);
  double coeff = 1.0;  // Gamma(j+2)/Gamma(j+2-2n), built incrementally
  double zpow = 1.0;
  double sum = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int n = 1; n < 40; ++n) {
    coeff *= (j + 1.0 - (2 * n - 2)) * (j + 1.0 - (2 * n - 1));
    zpow *= inv_z2;
    const double term = sommerfeld_eta()[static_cast<std::size_t>(n)] * coeff * zpow;
    if (std::abs(term) > last) break;  // asymptotic series started to diverge
    sum += term;
    last = std::abs(term);
    if (last < 1e-18) break;
  }
  return std::pow(z, j + 1.0) / std::tgamma(j + 2.0) * sum;
}

// Piecewise Chebyshev interpolant on unit cells of [kTableLo, kTableHi].
class ChebyshevTable {
 public:
  explicit ChebyshevTable(double j) {
    const int cells = static_cast<int>(kTableHi - kTableLo);
    coeffs_.resize(static_cast<std::size_t>(cells));
    std::array<double, kTableDegree + 1> values{};
    constexpr int n = kTableDegree + 1;
    for (int c = 0; c < cells; ++c) {
      const double mid = kTableLo + c + 0.5;
      for (int k = 0; k < n; ++k) {
        const double x = std::cos(std::numbers::pi * (k + 0.5) / n);
        values[static_cast<std::size_t>(k)] = fermi_dirac_quadrature(j, mid + 0.5 * x);
      }
      auto& a = coeffs_[static_cast<std::size_t>(c)];
      for (int m = 0; m < n; ++m) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
          acc += values[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * m * (k + 0.5) / n);
        }
        a[static_cast<std::size_t>(m)] = 2.0 * acc / n;
      }
      a[0] *= 0.5;
    }
  }

  double operator()(double z) const {
    int c = static_cast<int>(std::floor(z - kTableLo));
    if (c >= static_cast<int>(coeffs_.size())) c = static_cast<int>(coeffs_.size()) - 1;
    if (c < 0) c = 0;
    const double x = 2.0 * (z - (kTableLo + c + 0.5));
    const auto& a = coeffs_[static_cast<std::size_t>(c)];
    // Clenshaw recurrence
    double b1 = 0.0, b2 = 0.0;
    for (int m = kTableDegree; m >= 1; --m) {
      const double b0 = 2.0 * x * b1 - b2 + a[static_cast<std::size_t>(m)];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + a[0];
  }

 private:
  std::vector<std::array<double, kTableDegree + 1>> coeffs_;
};

const ChebyshevTable& table_for(double j) {
  static const ChebyshevTable half(0.5);
  static const ChebyshevTable minus_half(-0.5);
  return j > 0.0 ? half : minus_half;
}

double fd_half_order(double j, double z) {
  if (z < kTableLo) return fd_series(j, z);
  if (z >= kTableHi) return fd_sommerfeld(j, z);
  return table_for(j)(z);
}

void require_positive(double z, const char* what) {
  if (!(z > 0.0)) throw std::domain_error(std::string(what) + ": argument must be positive");
}

void require_unit_interval(double z, const char* what) {
  if (!(z > 0.0 && z < 1.0)) {
    throw std::domain_error(std::string(what) + ": argument must lie in (0,1) (vacancy saturation)");
  }
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

double fermi_dirac_quadrature(double j, double z) {
  if (!(j > -1.0)) throw std::domain_error("fermi_dirac_quadrature: order must satisfy j > -1");
  // s = t^2 turns s^j ds into 2 t^{2j+1} dt, smooth at t = 0 for j >= -1/2.
  const double edge = std::max(z, 0.0);
  const double t1 = std::sqrt(std::max(edge - 4.0, 0.0));
  const double t2 = std::sqrt(edge + 4.0);
  const double t3 = std::sqrt(edge + 60.0);  // beyond this the factor is below e^{-56}
  auto f = [j, z](double t) {
    const double power = (j == -0.5) ? 1.0 : std::pow(t, 2.0 * j + 1.0);
    return 2.0 * power * fermi_factor(t * t, z);
  };
  constexpr double tol = 1e-14;
  double total = 0.0;
  if (j < -0.5) {
    total += quad::integrate_singular(f, 0.0, t2, tol);
  } else {
    total += quad::integrate(f, 0.0, t1, tol) + quad::integrate(f, t1, t2, tol);
  }
  total += quad::integrate(f, t2, t3, tol);
  return total / std::tgamma(j + 1.0);
}

double fermi_dirac(FermiDiracOrder order, double z) {
  const double j = order.value();
  if (order.is_blakemore()) return blakemore(z);
  if (j == 0.5 || j == -0.5) return fd_half_order(j, z);
  if (j == 0.0) return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  if (z < kTableLo) return fd_series(j, z);
  return fermi_dirac_quadrature(j, z);
}

double fd_half_at_zero() {
  static const double value = fd_half(0.0);
  return value;
}

double inverse_fd_half(double z) {
  require_positive(z, "inverse_fd_half");
  // Bracket from e^y/2 <= F(y) <= e^y (y <= 0) and
  // y^{3/2}/(2 Gamma(5/2)) + 1/2 <= F(y) (y > 0).
  double lo, hi;
  const double f0 = fd_half_at_zero();
  if (z <= f0) {
    lo = std::log(z);
    hi = std::min(0.0, std::log(2.0 * z));
  } else {
    lo = 0.0;
    hi = std::pow(2.0 * gamma_fn(2.5) * std::max(z - 0.5, 0.0), 2.0 / 3.0) + 1.0;
  }
  double y = (z <= f0) ? lo : std::pow(gamma_fn(2.5) * z, 2.0 / 3.0);
  if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
  const double log_z = std::log(z);
  for (int it = 0; it < 100; ++it) {
    const double f = fd_half(y);
    const double r = std::log(f) - log_z;
    if (r > 0.0) hi = std::min(hi, y); else lo = std::max(lo, y);
    // Newton on log F(y) = log z; d/dy log F = F_{-1/2}/F_{1/2} in (0, 1].
    double step = r * f / fd_minus_half(y);
    double next = y - step;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      step = y - next;
    }
    y = next;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y)) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) {
      break;
    }
  }
  return y;
}

double g_prime(double z) {
  require_positive(z, "g_prime");
  return 1.0 / fd_minus_half(inverse_fd_half(z));
}

double blakemore_h(double z) {
  require_unit_interval(z, "blakemore_h");
  return std::log(z) - std::log1p(-z);
}

double blakemore_h_prime(double z) {
  require_unit_interval(z, "blakemore_h_prime");
  return 1.0 / (z * (1.0 - z));
}

double antideriv_G(double s) {
  require_positive(s, "antideriv_G");
  if (s == fd_half_at_zero()) return 0.0;
  // Substituting z = F_{1/2}(y): G(s) = int_0^{g(s)} y F_{-1/2}(y) dy.
  const double y = inverse_fd_half(s);
  return quad::integrate([](double t) { return t * fd_minus_half(t); }, 0.0, y);
}

double antideriv_H(double s) {
  require_unit_interval(s, "antideriv_H");
  return s * std::log(s) + (1.0 - s) * std::log1p(-s) + std::numbers::ln2;
}

double relative_energy_from_potentials(double y, double y_bar) {
  // G(s|s_bar) = int_{s_bar}^s (g(z) - g(s_bar)) dz = int_{y_bar}^{y} (t - y_bar) F_{-1/2}(t) dt
  if (y == y_bar) return 0.0;
  return quad::integrate_panels([y_bar](double t) { return (t - y_bar) * fd_minus_half(t); }, y_bar, y);
}

double relative_energy(double s, double s_bar) {
  require_positive(s, "relative_energy");
  require_positive(s_bar, "relative_energy");
  return std::max(0.0, relative_energy_from_potentials(inverse_fd_half(s), inverse_fd_half(s_bar)));
}

double g_tilde(double s) {
  require_positive(s, "g_tilde");
  if (s == fd_half_at_zero()) return 0.0;
  // sqrt(z) g'(z) dz = sqrt(F_{1/2}(t)) dt with z = F_{1/2}(t).
  return quad::integrate([](double t) { return std::sqrt(fd_half(t)); }, 0.0, inverse_fd_half(s));
}

double h_tilde(double s) {
  require_unit_interval(s, "h_tilde");
  return 2.0 * std::atanh(std::sqrt(s)) - 2.0 * std::atanh(1.0 / std::numbers::sqrt2);
}

}  // namespace memristor
