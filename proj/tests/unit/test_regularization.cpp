#include "memristor/derived_constants.hpp"
#include "memristor/regularization.hpp"
#include "memristor/statistics.hpp"

#include "quadrature_oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace memristor;
using testutil::rel_err;

namespace {

using oracle::real;

// G_{k,delta}(s) as an iterated integral: Gauss-Legendre nodes for the outer
// integral, and the inner antiderivative accumulated node to node in
// t = g(z), where S_k^1(z) dz = F_{1/2}(t) dt below the cap and
// k^{2/3} F_{1/2}(t)^{1/3} dt above it. Independent of the library's
// single-integral (Cauchy) evaluation.
real oracle_Gk(int k, real delta, real s) {
  const auto& rule = oracle::GaussLegendre20::get();
  const real F0 = oracle::fermi_dirac(0.5L, 0.0L);
  const real tk = oracle::inverse_fd_half(static_cast<real>(k));
  const real k23 = std::cbrt(static_cast<real>(k) * k);
  auto integrand = [&](real t) {
    const real F = oracle::fermi_dirac(0.5L, t);
    return t <= tk ? F / (F + delta) : k23 * std::cbrt(F) / (k + delta);
  };
  auto piece = [&](real a, real b) {
    if ((a - tk) * (b - tk) < 0) return oracle::panel(integrand, a, tk) + oracle::panel(integrand, tk, b);
    return oracle::panel(integrand, a, b);
  };

  struct Node {
    real z, w;
  };
  std::vector<Node> nodes;
  auto add = [&](real a, real b) {
    const real mid = 0.5L * (a + b), half = 0.5L * (b - a);
    for (int i = 0; i < oracle::GaussLegendre20::n; ++i) {
      nodes.push_back({mid + half * rule.x[static_cast<std::size_t>(i)], half * rule.w[static_cast<std::size_t>(i)]});
    }
  };
  if (s > k) {
    add(F0, static_cast<real>(k));
    add(static_cast<real>(k), s);
  } else {
    add(F0, s);
  }
  std::sort(nodes.begin(), nodes.end(), [&](const Node& x, const Node& y) { return std::fabs(x.z - F0) < std::fabs(y.z - F0); });

  real t_prev = 0.0L, inner = 0.0L, total = 0.0L;
  for (const Node& n : nodes) {
    const real t = oracle::inverse_fd_half(n.z);
    inner += piece(t_prev, t);
    t_prev = t;
    total += n.w * inner;
  }
  return total;
}

}  // namespace

TEST_SUITE("regularization") {

TEST_CASE("TruncationLevel validation") {
  CHECK_THROWS_AS(TruncationLevel(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TruncationLevel(1, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(TruncationLevel(1, fd_half_at_zero()), std::invalid_argument);
  const TruncationLevel level(4, 0.0);
  CHECK(level.vacancy_knot() == 0.8);
}

TEST_CASE("trunc_T examples") {
  CHECK(trunc_T(3.0, -1.0) == 0.0);
  CHECK(trunc_T(3.0, 2.0) == 2.0);
  CHECK(trunc_T(3.0, 10.0) == 3.0);
}

TEST_CASE("S_k examples") {
  for (int k : {1, 3, 50}) {
    CHECK(s_k1(k, -1.0) == 1.0);
    CHECK(s_k1(k, 0.0) == 1.0);
    CHECK(s_k2(k, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  }
  CHECK(s_k2(2, 0.999) == 3.0);
  CHECK(s_k2(2, -3.0) == 1.0);
}

TEST_CASE("S_k are continuous, bounded and positive") {
  for (int k : {1, 2, 5, 10}) {
    const double knot2 = k / (k + 1.0);
    CHECK(s_k2(k, knot2) == doctest::Approx(s_k2(k, std::nextafter(knot2, 2.0))).epsilon(1e-12));
    CHECK(s_k1(k, k) == doctest::Approx(s_k1(k, std::nextafter(static_cast<double>(k), 1e9))).epsilon(1e-12));
    // z g'(z) -> 1 as z -> 0
    CHECK(s_k1(k, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    for (double z = -2.0; z <= 3.0 * k; z += 0.01) {
      CHECK(s_k1(k, z) > 0.0);
      CHECK(s_k2(k, z) > 0.0);
      CHECK(s_k2(k, z) <= 1.0 + k);
    }
  }
}

TEST_CASE("S_k converge to the untruncated forms as k grows") {
  for (double z : testutil::linspace(0.01, 20.0, 40)) {
    CHECK(rel_err(s_k1(1000, z), z * g_prime(z)) < 1e-14);
  }
  for (double z : testutil::linspace(0.01, 0.99, 40)) {
    CHECK(rel_err(s_k2(1000, z), z * blakemore_h_prime(z)) < 1e-14);
  }
}

TEST_CASE("L_k examples and monotonicity") {
  CHECK(L_k(3, 0.0) == 0.0);
  CHECK(L_k(4, 0.8) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(5 * 0.8 - 4 + std::log(5.0) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(L_k(4, 0.9) == doctest::Approx(5 * 0.9 - 4 + std::log(5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(L_k(2, 1.0), std::domain_error);
  CHECK_THROWS_AS(L_k(2, -0.1), std::domain_error);
  for (int k = 1; k < 20; ++k) {
    double prev = -1.0;
    for (double s = 0.0; s < 1.0; s += 1e-3) {
      CHECK(L_k(k, s) <= L_k(k + 1, s) + 1e-15);
      CHECK(L_k(k, s) >= prev);
      prev = L_k(k, s);
    }
  }
  // convergence on [0, 0.95]
  for (double s = 0.0; s <= 0.95; s += 0.05) CHECK(L_k(100, s) == doctest::Approx(-std::log1p(-s)).epsilon(1e-14));
}

TEST_CASE("regularized functionals vanish at their anchors") {
  for (int k : {1, 10}) {
    for (double delta : {0.0, 0.1}) {
      const TruncationLevel level(k, delta);
      CHECK(G_k_delta(level, fd_half_at_zero()) == 0.0);
      CHECK(G_k_delta_prime(level, fd_half_at_zero()) == 0.0);
      CHECK(H_k_delta(level, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(g_tilde_k_delta(level, 0.0) == 0.0);
      CHECK(h_tilde_k_delta(level, 0.0) == 0.0);
    }
  }
  CHECK_THROWS_AS(H_k_delta(TruncationLevel(3, 0.0), 1.0), std::domain_error);
  CHECK_NOTHROW(H_k_delta(TruncationLevel(3, 0.1), 1.5));
  CHECK_THROWS_AS(G_k_delta(TruncationLevel(3, 0.1), -1.0), std::domain_error);
}

TEST_CASE("untruncated limits") {
  // below the knot with delta = 0 the truncated functionals are the originals
  const TruncationLevel big(1000, 0.0);
  for (double s : {0.05, 0.5, 3.0, 20.0}) {
    CHECK(rel_err(G_k_delta(big, s), antideriv_G(s)) < 1e-8);
    CHECK(rel_err(G_k_delta_prime(big, s), inverse_fd_half(s)) < 1e-8);
  }
  for (double s : {0.1, 0.5, 0.9}) {
    CHECK(std::abs(H_k_delta(big, s) - antideriv_H(s)) < 1e-9);
  }
  // h~_{k,0}(s) = int_0^s 1/((1-y) sqrt y) dy = 2 atanh(sqrt s); it differs from
  // h~ by the constant 2 atanh(1/sqrt 2), so both vanish at s = 1/2 only after shifting.
  for (double s : {0.1, 0.5, 0.9}) {
    CHECK(h_tilde_k_delta(big, s) == doctest::Approx(2 * std::atanh(std::sqrt(s))).epsilon(1e-9));
    CHECK(h_tilde_k_delta(big, s) - h_tilde_k_delta(big, 0.5) == doctest::Approx(h_tilde(s) - h_tilde(0.5)).epsilon(1e-9));
  }
}

TEST_CASE("G_k_delta against the nested-quadrature oracle") {
  struct Case {
    int k;
    double delta, s;
  };
  for (const Case& c : {Case{1, 0.1, 0.2}, Case{2, 0.01, 4.0}, Case{10, 0.1, 5.0}}) {
    const double ref = static_cast<double>(oracle_Gk(c.k, c.delta, c.s));
    const double got = G_k_delta(TruncationLevel(c.k, c.delta), c.s);
    CHECK(std::abs(got - ref) < 1e-8 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("derivatives of G_k_delta are consistent") {
  for (const TruncationLevel& level : {TruncationLevel(2, 0.1), TruncationLevel(10, 0.0)}) {
    for (double s : {0.3, 1.7, 6.0, 30.0}) {
      const double h = 1e-4 * s;
      const double d1 = (G_k_delta(level, s + h) - G_k_delta(level, s - h)) / (2 * h);
      CHECK(rel_err(d1, G_k_delta_prime(level, s)) < 1e-6);
      const double d2 = (G_k_delta_prime(level, s + h) - G_k_delta_prime(level, s - h)) / (2 * h);
      CHECK(rel_err(d2, G_k_delta_second(level, s)) < 1e-6);
    }
  }
}

TEST_CASE("tilde integrands") {
  const TruncationLevel level(3, 0.05);
  for (double s : {0.1, 0.6, 0.9}) {
    const double h = 1e-6;
    const double d = (h_tilde_k_delta(level, s + h) - h_tilde_k_delta(level, s - h)) / (2 * h);
    CHECK(rel_err(d, h_tilde_k_delta_prime(level, s)) < 1e-6);
  }
  // g~_{k,delta}' = S_k^1 / sqrt(T_k + delta)
  for (double s : {0.5, 2.0, 8.0}) {
    const double h = 1e-5 * s;
    const double d = (g_tilde_k_delta(level, s + h) - g_tilde_k_delta(level, s - h)) / (2 * h);
    CHECK(rel_err(d, s_k1(3, s) / std::sqrt(trunc_T(3.0, s) + 0.05)) < 1e-6);
  }
}

TEST_CASE("monotone beyond the reference point") {
  const TruncationLevel level(5, 0.1);
  double prev = 0.0;
  for (double s = fd_half_at_zero(); s < 40.0; s += 0.5) {
    const double v = G_k_delta(level, s);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("truncated energy bound example with the frozen constant") {
  const double C = DerivedConstants::load_default().get("trunc_energy");
  const double G = G_k_delta(TruncationLevel(10, 0.1), 5.0);
  CHECK(std::pow(trunc_T(10.0, 5.0), 5.0 / 3.0) <= C * (1.0 + G));
}

TEST_CASE("coercivity: g' <= G_k'' and h~_k' >= max(s^{-1/2}, 1)") {
  for (int k : {1, 2, 5, 10, 50}) {
    const TruncationLevel level(k, 0.0);
    for (double s = 1e-3; s <= 1e3; s *= 1.3) CHECK(g_prime(s) <= G_k_delta_second(level, s) * (1 + 1e-14));
    for (double s = 1e-4; s < 1.0; s += 0.01) {
      CHECK(h_tilde_k_delta_prime(level, s) >= std::max(1.0 / std::sqrt(s), 1.0) * (1 - 1e-14));
    }
  }
}

}  // TEST_SUITE
