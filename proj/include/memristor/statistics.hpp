#pragma once

#include <cmath>
#include <stdexcept>

namespace memristor {

/// Order j of a Fermi-Dirac integral. Orders above -1 are genuine integrals;
/// j = -1 is the Blakemore limit 1/(1+e^{-z}), which the model uses for the
/// vacancy density.
class FermiDiracOrder {
 public:
  explicit FermiDiracOrder(double j) : j_(j) {
    if (!(j >= -1.0) || !std::isfinite(j)) {
      throw std::domain_error("FermiDiracOrder: order must satisfy j >= -1");
    }
  }

  static FermiDiracOrder minus_one() { return FermiDiracOrder(-1.0); }
  static FermiDiracOrder minus_half() { return FermiDiracOrder(-0.5); }
  static FermiDiracOrder half() { return FermiDiracOrder(0.5); }

  double value() const { return j_; }
  bool is_blakemore() const { return j_ == -1.0; }

 private:
  double j_;
};

enum class StatisticsKind { FermiDiracHalf, Blakemore };

/// Gamma function; throws std::domain_error for x <= 0.
double gamma_fn(double x);

/// Normalized Fermi-Dirac integral F_j(z) = 1/Gamma(j+1) int_0^inf s^j/(1+e^{s-z}) ds.
///
/// Orders -1, -1/2 and 1/2 take a fast path: alternating exponential series
/// for z < -2, piecewise Chebyshev tables on [-2, 40] and the Sommerfeld
/// expansion above. Any other order is integrated adaptively.
double fermi_dirac(FermiDiracOrder j, double z);

/// Adaptive-quadrature evaluation for any order j > -1, bypassing the tables.
double fermi_dirac_quadrature(double j, double z);

inline double fd_half(double z) { return fermi_dirac(FermiDiracOrder::half(), z); }
inline double fd_minus_half(double z) { return fermi_dirac(FermiDiracOrder::minus_half(), z); }

/// Logistic function F_{-1}(z), evaluated without overflow.
inline double blakemore(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// 1 - F_{-1}(z) without cancellation.
inline double blakemore_complement(double z) { return blakemore(-z); }

/// F_{1/2}(0), the reference point of G and g~.
double fd_half_at_zero();

/// g(z) = F_{1/2}^{-1}(z) for z > 0.
double inverse_fd_half(double z);

/// g'(z) = 1 / F_{-1/2}(g(z)).
double g_prime(double z);

/// h(z) = log z - log(1-z) on (0,1).
double blakemore_h(double z);

/// h'(z) = 1/(z(1-z)) on (0,1).
double blakemore_h_prime(double z);

/// G(s) = int_{F_{1/2}(0)}^s g(z) dz.
double antideriv_G(double s);

/// H(s) = int_{1/2}^s h(z) dz = s log s + (1-s) log(1-s) + log 2.
double antideriv_H(double s);

/// Relative energy G(s|s_bar) = G(s) - G(s_bar) - g(s_bar)(s - s_bar) >= 0.
double relative_energy(double s, double s_bar);

/// Same as relative_energy, for callers that already know g(s) and g(s_bar).
double relative_energy_from_potentials(double y, double y_bar);

/// g~(s) = int_{F_{1/2}(0)}^s sqrt(z) g'(z) dz.
double g_tilde(double s);

/// h~(s) = 2 atanh(sqrt s) - 2 atanh(1/sqrt 2).
double h_tilde(double s);

}  // namespace memristor
