#include "memristor/derived_constants.hpp"
#include "memristor/verification.hpp"

#include "quadrature_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace memristor;

TEST_SUITE("verification") {

TEST_CASE("frozen constants load with provenance") {
  const DerivedConstants dc = DerivedConstants::load_default();
  for (const char* name : {"gprime_lower", "gprime_upper", "zgprime_upper", "trunc_energy", "coercive_s53",
                           "coercive_T76", "coercive_gt107", "coercive_T53"}) {
    CAPTURE(name);
    REQUIRE(dc.contains(name));
    const DerivedConstant& c = dc.all().at(name);
    // the lower bracket is divided by the safety factor, every other one multiplied
    const double expected = std::string(name) == "gprime_lower" ? c.observed / kDerivedSafetyFactor
                                                                : c.observed * kDerivedSafetyFactor;
    CHECK(c.value == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK_FALSE(dc.provenance().empty());
  CHECK_THROWS(dc.get("no_such_constant"));
  CHECK_THROWS(DerivedConstants::load("/nonexistent/constants.csv"));
}

TEST_CASE("g' envelope holds against the oracle") {
  const DerivedConstants dc = DerivedConstants::load_default();
  const double c1 = dc.get("gprime_lower"), c2 = dc.get("gprime_upper");
  for (double z : verify::log_grid(1e-8, 1e8, 33)) {
    CAPTURE(z);
    const oracle::real t = oracle::inverse_fd_half(static_cast<oracle::real>(z));
    const double gp = static_cast<double>(1.0L / oracle::fermi_dirac(-0.5L, t));
    const double ratio = verify::gprime_envelope_ratio(z, gp);
    CHECK(ratio >= c1);
    CHECK(ratio <= c2);
  }
}

TEST_CASE("suite registry") {
  CHECK(verify::suite_names().size() == 5);
  CHECK(verify::is_suite("poincare"));
  CHECK_FALSE(verify::is_suite("bogus"));
  CHECK_THROWS_AS(verify::run_suite("bogus", DerivedConstants::load_default()), std::invalid_argument);
}

TEST_CASE("every suite passes with the frozen constants") {
  const DerivedConstants dc = DerivedConstants::load_default();
  for (const std::string& name : verify::suite_names()) {
    CAPTURE(name);
    const verify::SuiteResult r = verify::run_suite(name, dc);
    CHECK(r.passed());
    CHECK_FALSE(r.checks.empty());
    CHECK(verify::format_suite(r).find(name) != std::string::npos);
  }
}

}  // TEST_SUITE
