#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dmimo/scenario.hpp"

using namespace dmimo;

namespace {

std::string minimal_json(double xi = 0.01, double delay_ms = 500.0,
                         double rate_bps = 1e5) {
  std::string s = R"({
    "bs_positions": [[0, 0], [100, 0]],
    "user_positions": [[50, 0]],
    "tx_antennas": 3,
    "rx_antennas": 2,
    "qos": [{"arrival_rate_bps": )" +
                  std::to_string(rate_bps) + R"(, "delay_bound_ms": )" +
                  std::to_string(delay_ms) + R"(, "violation_prob": )" +
                  std::to_string(xi) + "}]}";
  return s;
}

}  // namespace

TEST_CASE("total power law") {
  CHECK(total_power(0, 1.0, 1.0) == 0.0);
  CHECK(total_power(1, 1.0, 1.0) == 1.0);
  CHECK(total_power(4, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(total_power(3, 2.0, 0.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(total_power(-1, 1.0, 1.0), std::domain_error);
}

TEST_CASE("qos exponent worked values") {
  // xi = e^-1 with cbar * D = 1 gives exponent exactly 1.
  CHECK(qos_exponent(1.0, 1.0, std::exp(-1.0)) == doctest::Approx(1.0));

  // xi = 1e-2, delay 500 ms, 100 Kbit/s: theta per bit is
  // -ln(1e-2) / (1e5 * 0.5) = 9.2103e-5; per nat it is that over ln 2.
  const double t = 0.01;
  const double cbar_nats = 1e5 * t * std::log(2.0);
  const double delay_frames = 0.5 / t;
  const double theta = qos_exponent(cbar_nats, delay_frames, 1e-2);
  CHECK(theta * std::log(2.0) == doctest::Approx(9.2103e-5).epsilon(1e-4));

  // Halving the log of the violation probability halves theta.
  const double theta_half = qos_exponent(cbar_nats, delay_frames, 1e-1);
  CHECK(theta_half == doctest::Approx(0.5 * theta).epsilon(1e-12));

  CHECK_THROWS_AS(qos_exponent(1.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(qos_exponent(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("scenario parse and derived quantities") {
  const Scenario s = scenario_from_json_text(minimal_json());
  CHECK(s.num_bs() == 2);
  CHECK(s.num_users() == 1);
  CHECK(s.tx_antennas == std::vector<int>{3, 3});
  CHECK(s.rx_antennas == std::vector<int>{2});
  CHECK(s.bt_product() == doctest::Approx(1000.0));
  CHECK(s.gain_constant == doctest::Approx(std::pow(50.0, 4.0)));
  CHECK(s.qos[0].cbar_nats == doctest::Approx(1e5 * 0.01 * std::log(2.0)));
  CHECK(s.qos[0].delay_frames == doctest::Approx(50.0));
  CHECK(s.qos[0].theta ==
        doctest::Approx(qos_exponent(s.qos[0].cbar_nats, 50.0, 0.01)));
  CHECK(s.total_tx_antennas() == 6);
}

TEST_CASE("scenario validation failures") {
  CHECK_THROWS_AS(scenario_from_json_text(minimal_json(1.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json_text(minimal_json(0.01, -1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json_text("{\"bs_positions\": []}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json_text("not json"), std::invalid_argument);
}

TEST_CASE("scenario hash is stable and distinguishes scenarios") {
  const Scenario a = scenario_from_json_text(minimal_json());
  const Scenario b = scenario_from_json_text(minimal_json());
  const Scenario c = scenario_from_json_text(minimal_json(0.01, 500.0, 2e5));
  CHECK(scenario_hash(a) == scenario_hash(b));
  CHECK(scenario_hash(a) != scenario_hash(c));

  // Round trip through the canonical serialization.
  const Scenario rt = scenario_from_json_text(scenario_to_json_text(a));
  CHECK(scenario_hash(rt) == scenario_hash(a));
}

TEST_CASE("shipped default config loads") {
  const Scenario s = load_scenario(std::string(DMIMO_CONFIG_DIR) + "/default.json");
  CHECK(s.num_bs() == 5);
  CHECK(s.num_users() == 3);
  CHECK(s.bt_product() == doctest::Approx(1000.0));
}
