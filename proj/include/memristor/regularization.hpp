#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memristor {

/// Truncation level (k, delta) of the regularized energy functionals.
/// delta = 0 selects the G_k = G_{k,0} family.
class TruncationLevel {
 public:
  TruncationLevel(int k, double delta);

  int k() const { return k_; }
  double delta() const { return delta_; }
  /// Knot k/(k+1) of the vacancy truncation.
  double vacancy_knot() const { return static_cast<double>(k_) / (k_ + 1.0); }

 private:
  int k_;
  double delta_;
};

/// T_k(z) = max(0, min(k, z)).
template <typename Scalar>
Scalar trunc_T(Scalar k, Scalar z) {
  return std::max(Scalar(0), std::min(k, z));
}

/// S_k^1: 1 for z <= 0, z g'(z) on (0, k], k^{2/3} z^{1/3} g'(z) above.
double s_k1(int k, double z);

/// S_k^2: 1 for z <= 0, 1/(1-z) on (0, k/(k+1)], 1 + k above.
double s_k2(int k, double z);

/// L_k(s): -log(1-s) up to k/(k+1), then the tangent line (k+1)s - k + log(k+1).
double L_k(int k, double s);

/// Double antiderivative of S_k^1/(T_k + delta) anchored at F_{1/2}(0); s >= 0.
double G_k_delta(const TruncationLevel& level, double s);

/// First antiderivative int_{F_{1/2}(0)}^s S_k^1/(T_k + delta) dz.
double G_k_delta_prime(const TruncationLevel& level, double s);

/// Second derivative S_k^1(s) / (T_k(s) + delta) of G_{k,delta}.
double G_k_delta_second(const TruncationLevel& level, double s);

/// g~_{k,delta}(s) = int_0^s S_k^1(y) / sqrt(T_k(y) + delta) dy.
double g_tilde_k_delta(const TruncationLevel& level, double s);

/// Double antiderivative of S_k^2/(T_{k/(k+1)} + delta) anchored at 1/2.
/// Domain s in [0, 1) when delta = 0.
double H_k_delta(const TruncationLevel& level, double s);

/// h~_{k,delta}(s) = int_0^s S_k^2(y) / sqrt(T_{k/(k+1)}(y) + delta) dy.
double h_tilde_k_delta(const TruncationLevel& level, double s);

/// Integrand of h~_{k,delta}, i.e. its derivative.
double h_tilde_k_delta_prime(const TruncationLevel& level, double s);

}  // namespace memristor
