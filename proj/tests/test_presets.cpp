#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/presets.hpp"

#include <cmath>
#include <variant>

using namespace proxsarah;

TEST_CASE("integer roots") {
  CHECK(isqrt(0) == 0);
  CHECK(isqrt(99) == 9);
  CHECK(isqrt(100) == 10);
  CHECK(isqrt(1000000000000ULL) == 1000000);
  CHECK(icbrt(26) == 2);
  CHECK(icbrt(27) == 3);
  CHECK(icbrt(1000) == 10);
  CHECK(ipow_two_thirds(7) == 3);
  CHECK(ipow_two_thirds(8) == 4);
  CHECK(ipow_two_thirds(1000) == 100);
}

TEST_CASE("catalog has eight variants and four baselines") {
  const auto& cat = preset_catalog();
  REQUIRE(cat.size() == 12);
  int baselines = 0;
  for (const auto& e : cat) baselines += e.baseline;
  CHECK(baselines == 4);
  CHECK(cat.front().name == "v1");
}

TEST_CASE("preset names") {
  CHECK(canonical_preset_name("ProxSARAH-A-v2") == "A-v2");
  CHECK(canonical_preset_name("V1") == "v1");
  CHECK(canonical_preset_name("Prox-SVRG") == "prox-svrg");
  CHECK_THROWS_AS(canonical_preset_name("v9"), ConfigError);
}

TEST_CASE("v1 and A-v1") {
  const auto v1 = std::get<ProxSarahConfig>(make_preset("v1", 10000, 1.0));
  CHECK(v1.rule == ScheduleRule::kConstant);
  CHECK(v1.m == 10000);
  CHECK(v1.b_hat == 1);
  const auto av1 = std::get<ProxSarahConfig>(make_preset("A-v1", 10000, 1.0));
  CHECK(av1.rule == ScheduleRule::kAdaptive);
  CHECK(av1.eta == 0.5);
  const auto av2 = std::get<ProxSarahConfig>(make_preset("A-v2", 10000, 1.0));
  CHECK(av2.m == 100);
  CHECK(av2.b_hat == 100);
  CHECK(av2.eta == doctest::Approx(2.0 / 3.99));
}

TEST_CASE("trade-off presets") {
  const auto v2 = std::get<ProxSarahConfig>(make_preset("v2", 10000, 1.0));
  CHECK(v2.rule == ScheduleRule::kTradeoff);
  CHECK(v2.m == 100);
  // Tiny n makes m < C; the preset falls back to explicit steps.
  log::set_level(log::Level::kQuiet);
  const auto small = std::get<ProxSarahConfig>(make_preset("v2", 2, 0.1));
  log::set_level(log::Level::kWarn);
  CHECK(small.rule == ScheduleRule::kExplicit);
  CHECK(small.b_hat == 1);
  CHECK(small.gamma == 0.95);
}

TEST_CASE("baseline presets") {
  const auto svrg = std::get<ProxSvrgConfig>(make_preset("prox-svrg", 1000, 2.0));
  CHECK(svrg.b_hat == 1);
  CHECK(svrg.m == 1000);
  CHECK(svrg.eta == doctest::Approx(1.0 / 6000.0));
  Method mb = make_preset("prox-svrg", 1000, 1.0);
  apply_override(mb, "minibatch", "true", 1000, 1.0);
  const auto& svrg2 = std::get<ProxSvrgConfig>(mb);
  CHECK(svrg2.b_hat == 100);
  CHECK(svrg2.m == 10);
  CHECK(svrg2.eta == doctest::Approx(1.0 / 3.0));
  const auto sb = std::get<ProxSpiderBoostConfig>(make_preset("prox-spiderboost", 10000, 1.0));
  CHECK(sb.b_hat == 100);
  CHECK(sb.m == 100);
  CHECK(sb.eta == 0.5);
  const auto sgd = std::get<ProxSgdConfig>(make_preset("prox-sgd", 10, 1.0));
  CHECK(sgd.eta0 == 0.1);
  CHECK(sgd.eta_tilde == 1.0);
  CHECK(std::get<ProxGdConfig>(make_preset("prox-gd", 10, 4.0)).eta == doctest::Approx(0.25));
}

TEST_CASE("overrides name the offending key") {
  Method m = make_preset("v1", 100, 1.0);
  apply_override(m, "m", "50", 100, 1.0);
  CHECK(std::get<ProxSarahConfig>(m).m == 50);
  try {
    apply_override(m, "minibatch", "true", 100, 1.0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("minibatch") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_override(m, "m", "abc", 100, 1.0), ConfigError);
}

TEST_CASE("describe prints derived parameters") {
  const std::string text = describe_preset("v1", 10000, 1.0);
  CHECK(text.find("0.008164965809") != std::string::npos);
  CHECK(text.find("0.4989814584") != std::string::npos);
  CHECK(method_family(make_preset("prox-gd", 10, 1.0)) == "ProxGD");
}
