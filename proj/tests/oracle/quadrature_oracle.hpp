#pragma once

// Test-only reference integrator. Long-double adaptive Gauss-Legendre with
// nodes generated from scratch, so nothing here shares code with the
// library's quadrature or its Fermi-Dirac fast path.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using real = long double;

struct GaussLegendre20 {
  static constexpr int n = 20;
  std::array<real, n> x{};
  std::array<real, n> w{};

  GaussLegendre20() {
    for (int i = 0; i < n; ++i) {
      real t = std::cos(std::numbers::pi_v<real> * (i + 0.75L) / (n + 0.5L));
      for (int it = 0; it < 100; ++it) {
        real p0 = 1.0L, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const real dp = n * (t * p1 - p0) / (t * t - 1.0L);
        const real dt = p1 / dp;
        t -= dt;
        if (std::fabs(dt) < 1e-19L) {
          x[static_cast<std::size_t>(i)] = t;
          w[static_cast<std::size_t>(i)] = 2.0L / ((1.0L - t * t) * dp * dp);
          break;
        }
      }
    }
  }

  static const GaussLegendre20& get() {
    static const GaussLegendre20 rule;
    return rule;
  }
};

inline real panel(const std::function<real(real)>& f, real a, real b) {
  const auto& r = GaussLegendre20::get();
  const real mid = 0.5L * (a + b), half = 0.5L * (b - a);
  real acc = 0.0L;
  for (int i = 0; i < GaussLegendre20::n; ++i) {
    acc += r.w[static_cast<std::size_t>(i)] * f(mid + half * r.x[static_cast<std::size_t>(i)]);
  }
  return acc * half;
}

// Error per panel is measured against `abs_tol`, a fraction of the whole
// integral, so panels whose integrand is only known to roundoff stop early.
inline real adapt(const std::function<real(real)>& f, real a, real b, real whole, real abs_tol, int depth) {
  const real m = 0.5L * (a + b);
  const real left = panel(f, a, m), right = panel(f, m, b);
  const real refined = left + right;
  if (depth <= 0 || std::fabs(refined - whole) <= abs_tol) return refined;
  return adapt(f, a, m, left, abs_tol, depth - 1) + adapt(f, m, b, right, abs_tol, depth - 1);
}

struct Piece {
  real a, b;
};

// Adaptive sum over pieces to tolerance tol relative to the total.
inline real integrate_pieces(const std::function<real(real)>& f, const std::vector<Piece>& pieces, real tol) {
  std::vector<real> coarse;
  real rough = 0.0L;
  for (const Piece& p : pieces) {
    coarse.push_back(panel(f, p.a, p.b));
    rough += std::fabs(coarse.back());
  }
  const real abs_tol = tol * rough + 1e-300L;
  real acc = 0.0L;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    acc += adapt(f, pieces[i].a, pieces[i].b, coarse[i], abs_tol, 40);
  }
  return acc;
}

// [a, b] split into unit-ish pieces (at most 400) so narrow features are not missed.
inline void split(std::vector<Piece>& out, real a, real b) {
  const int count = std::max(1, static_cast<int>(std::min<real>(std::ceil(b - a), 400.0L)));
  for (int i = 0; i < count; ++i) out.push_back({a + (b - a) * i / count, a + (b - a) * (i + 1) / count});
}

/// Adaptive integral of f over [a, b] to tolerance tol relative to the integral.
inline real integrate(const std::function<real(real)>& f, real a, real b, real tol = 1e-18L) {
  if (a == b) return 0.0L;
  if (a > b) return -integrate(f, b, a, tol);
  std::vector<Piece> pieces;
  split(pieces, a, b);
  return integrate_pieces(f, pieces, tol);
}

/// F_j(z) for j > -1 via s = t^{1/(j+1)}, which turns s^j ds into dt/(j+1).
inline real fermi_dirac(real j, real z) {
  const real p = 1.0L / (j + 1.0L);
  auto fermi = [z](real s) {
    return s > z ? std::exp(z - s) / (1.0L + std::exp(z - s)) : 1.0L / (1.0L + std::exp(s - z));
  };
  auto f = [&](real t) { return fermi(std::pow(t, p)); };
  // Pieces of unit width in s across the Fermi edge and tail, mapped to t.
  // The flat bulk below edge - 50 and the tail beyond edge + 70 (e^-70) are
  // single pieces; one wide panel can miss a feature that a coarse/refined
  // comparison never sees.
  const real edge = z > 0 ? z : 0.0L;
  const real s_lo = std::max(0.0L, std::floor(edge - 50.0L));
  std::vector<Piece> pieces;
  real t_prev = 0.0L;
  if (s_lo > 0) {
    t_prev = std::pow(s_lo, j + 1.0L);
    pieces.push_back({0.0L, t_prev});
  }
  for (real s_k = s_lo + 1.0L; s_k <= edge + 70.0L; s_k += 1.0L) {
    const real t_k = std::pow(s_k, j + 1.0L);
    pieces.push_back({t_prev, t_k});
    t_prev = t_k;
  }
  return integrate_pieces(f, pieces, 1e-18L) * p / std::tgamma(j + 1.0L);
}

/// Inverse of F_{1/2}, bracketed Newton on the oracle integrals.
inline real inverse_fd_half(real z) {
  if (!(z > 0)) throw std::domain_error("oracle::inverse_fd_half");
  real lo = -800.0L, hi = 2.0L * std::pow(z, 2.0L / 3.0L) + 10.0L;
  real y = z < 1 ? std::log(z) : std::pow(1.3293403881791355L * z, 2.0L / 3.0L);
  for (int it = 0; it < 200; ++it) {
    const real f = fermi_dirac(0.5L, y) - z;
    if (f > 0) hi = y; else lo = y;
    real next = y - f / fermi_dirac(-0.5L, y);
    if (!(next > lo && next < hi)) next = 0.5L * (lo + hi);
    if (std::fabs(next - y) < 1e-18L * (1.0L + std::fabs(y))) return next;
    y = next;
  }
  return y;
}

}  // namespace oracle
