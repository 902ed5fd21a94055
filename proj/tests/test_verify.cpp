#include <doctest.h>

#include "proxsarah/verify.hpp"

using namespace proxsarah;

TEST_CASE("chi-square helpers") {
  CHECK(chi_square_critical(5, 0.001) == doctest::Approx(20.515).epsilon(1e-4));
  CHECK(chi_square_critical(7, 0.001) == doctest::Approx(24.322).epsilon(1e-4));
  CHECK(chi_square_statistic({50, 50}, {0.5, 0.5}) == 0.0);
  CHECK(chi_square_statistic({60, 40}, {0.5, 0.5}) == doctest::Approx(4.0));
}

TEST_CASE("step-size suite passes and catches a perturbed omega") {
  for (const CheckResult& r : step_size_checks()) CHECK_MESSAGE(r.pass, r.name);
  VerifyOptions bad;
  bad.omega_scale = 1.1;
  bool caught = false;
  for (const CheckResult& r : step_size_checks(bad)) {
    if (r.name.find("constant composite steps") != std::string::npos && !r.pass) caught = true;
  }
  CHECK(caught);
}

TEST_CASE("report lists every check with its residual") {
  const std::vector<CheckResult> rs{{"alpha", 1e-14, 1e-12, true, ""}, {"beta", 0.5, 0.1, false, "w=1"}};
  const std::string text = format_report(rs);
  CHECK(text.find("alpha") != std::string::npos);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("w=1") != std::string::npos);
}
