#include "memristor/regularization.hpp"

#include "memristor/quadrature.hpp"
#include "memristor/statistics.hpp"

#include <string>
#include <vector>

namespace memristor {

namespace {

constexpr double kNestedTol = 1e-10;

void require_nonnegative(double s, const char* what) {
  if (!(s >= 0.0)) throw std::domain_error(std::string(what) + ": argument must be nonnegative");
}

void require_vacancy_domain(const TruncationLevel& level, double s, const char* what) {
  require_nonnegative(s, what);
  if (level.delta() == 0.0 && !(s < 1.0)) {
    throw std::domain_error(std::string(what) + ": argument must be < 1 when delta = 0");
  }
}

// Integrate f over [a, b] splitting at the given knots.
template <class F>
double integrate_split(F&& f, double a, double b, std::vector<double> knots) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> pts{lo};
  for (double k : knots) {
    if (k > lo && k < hi) pts.push_back(k);
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += quad::integrate(f, pts[i], pts[i + 1], kNestedTol);
  return a <= b ? total : -total;
}

// int_{ref}^{s} int_{ref}^{y} w(z) dz dy, collapsed to one integral of (s - z) w(z).
template <class W>
double double_antiderivative(W&& w, double ref, double s, std::vector<double> knots) {
  if (s == ref) return 0.0;
  auto f = [&](double z) { return (s - z) * w(z); };
  return integrate_split(f, ref, s, std::move(knots));
}

double carrier_weight(const TruncationLevel& level, double z) {
  return s_k1(level.k(), z) / (trunc_T(static_cast<double>(level.k()), z) + level.delta());
}

double vacancy_weight(const TruncationLevel& level, double z) {
  return s_k2(level.k(), z) / (trunc_T(level.vacancy_knot(), z) + level.delta());
}

}  // namespace

TruncationLevel::TruncationLevel(int k, double delta) : k_(k), delta_(delta) {
  if (k < 1) throw std::invalid_argument("TruncationLevel: k must be >= 1");
  if (!(delta >= 0.0 && delta < fd_half_at_zero())) {
    throw std::invalid_argument("TruncationLevel: delta must lie in [0, F_{1/2}(0))");
  }
}

double s_k1(int k, double z) {
  if (z <= 0.0) return 1.0;
  if (z <= k) return z * g_prime(z);
  return std::cbrt(static_cast<double>(k) * k) * std::cbrt(z) * g_prime(z);
}

double s_k2(int k, double z) {
  if (z <= 0.0) return 1.0;
  if (z <= static_cast<double>(k) / (k + 1.0)) return 1.0 / (1.0 - z);
  return 1.0 + k;
}

double L_k(int k, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("L_k: argument must lie in [0, 1)");
  const double knot = static_cast<double>(k) / (k + 1.0);
  if (s <= knot) return -std::log1p(-s);
  return (k + 1.0) * s - k + std::log(k + 1.0);
}

double G_k_delta(const TruncationLevel& level, double s) {
  require_nonnegative(s, "G_k_delta");
  return double_antiderivative([&](double z) { return carrier_weight(level, z); }, fd_half_at_zero(), s,
                               {static_cast<double>(level.k())});
}

double G_k_delta_prime(const TruncationLevel& level, double s) {
  require_nonnegative(s, "G_k_delta_prime");
  return integrate_split([&](double z) { return carrier_weight(level, z); }, fd_half_at_zero(), s,
                         {static_cast<double>(level.k())});
}

double G_k_delta_second(const TruncationLevel& level, double s) {
  require_nonnegative(s, "G_k_delta_second");
  return carrier_weight(level, s);
}

double g_tilde_k_delta(const TruncationLevel& level, double s) {
  require_nonnegative(s, "g_tilde_k_delta");
  // y = t^2 removes the y^{-1/2} endpoint behaviour at delta = 0.
  const double k = level.k();
  auto f = [&](double t) {
    const double y = t * t;
    if (t == 0.0) return level.delta() > 0.0 ? 0.0 : 2.0;  // y g'(y) -> 1 as y -> 0
    return 2.0 * t * s_k1(level.k(), y) / std::sqrt(trunc_T(k, y) + level.delta());
  };
  return integrate_split(f, 0.0, std::sqrt(s), {std::sqrt(k)});
}

double H_k_delta(const TruncationLevel& level, double s) {
  require_vacancy_domain(level, s, "H_k_delta");
  return double_antiderivative([&](double z) { return vacancy_weight(level, z); }, 0.5, s, {level.vacancy_knot()});
}

double h_tilde_k_delta_prime(const TruncationLevel& level, double s) {
  require_vacancy_domain(level, s, "h_tilde_k_delta_prime");
  return s_k2(level.k(), s) / std::sqrt(trunc_T(level.vacancy_knot(), s) + level.delta());
}

double h_tilde_k_delta(const TruncationLevel& level, double s) {
  require_vacancy_domain(level, s, "h_tilde_k_delta");
  auto f = [&](double t) {
    const double y = t * t;
    if (t == 0.0) return level.delta() > 0.0 ? 0.0 : 2.0;
    return 2.0 * t * s_k2(level.k(), y) / std::sqrt(trunc_T(level.vacancy_knot(), y) + level.delta());
  };
  return integrate_split(f, 0.0, std::sqrt(s), {std::sqrt(level.vacancy_knot())});
}

}  // namespace memristor
