#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "order_check.hpp"

using namespace iisim;

TEST_CASE("the default ladder meets every convergence gate") {
  const OrderCheckResult result = run_order_check();
  REQUIRE(result.studies.size() == 3);
  CHECK(result.pass);

  const ConvergenceStudy& repro = result.studies[0];
  REQUIRE(repro.steps.size() == 4);
  CHECK(repro.steps[0] == doctest::Approx(1e-2));
  CHECK(repro.steps[3] == doctest::Approx(1.25e-3));
  CHECK(repro.exact == 3.5);
  for (double e : repro.errors) CHECK(e <= 1e-10);
  CHECK(std::isnan(repro.observed_order));
  CHECK(repro.pass);

  const ConvergenceStudy& decay = result.studies[1];
  CHECK(decay.exact == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(decay.observed_order >= 3.5);
  CHECK(decay.observed_order <= 4.5);
  CHECK(decay.pass);

  const ConvergenceStudy& delayed = result.studies[2];
  // Frozen endpoint from solving the two segments by hand.
  CHECK(delayed.exact == doctest::Approx(0.36065928187182661).epsilon(1e-15));
  CHECK(delayed.observed_order >= 2.5);
  for (std::size_t i = 1; i < delayed.errors.size(); ++i) {
    CHECK(delayed.errors[i] < delayed.errors[i - 1]);
  }
  CHECK(delayed.pass);
}

TEST_CASE("a coarser base step still converges and heads the ladder") {
  const OrderCheckResult result = run_order_check(2e-2);
  CHECK(result.studies[0].steps[0] == doctest::Approx(2e-2));
  CHECK(result.pass);
}

TEST_CASE("a step that cannot carry the unit delay is rejected up front") {
  CHECK_THROWS_WITH_AS(run_order_check(3e-3), doctest::Contains("h"), Error);
  CHECK_THROWS_AS(run_order_check(0.0), Error);
  CHECK_THROWS_AS(run_order_check(-1e-2), Error);
}

TEST_CASE("results serialize to JSON with the reproduction order nulled") {
  const OrderCheckResult result = run_order_check();
  const auto j = nlohmann::json::parse(order_check_json(result));
  CHECK(j["pass"] == true);
  REQUIRE(j["studies"].size() == 3);
  CHECK(j["studies"][0]["observed_order"].is_null());
  CHECK(j["studies"][1]["observed_order"].get<double>() >= 3.5);
  CHECK(j["studies"][2]["errors"].size() == 4);

  const std::string table = order_check_table(result);
  CHECK(table.find("order check: PASS") != std::string::npos);
  CHECK(table.find("observed order") != std::string::npos);
}
