#include "dmimo/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dmimo {

using nlohmann::json;

int Scenario::total_tx_antennas() const {
  return std::accumulate(tx_antennas.begin(), tx_antennas.end(), 0);
}

double qos_exponent(double cbar_nats, double delay_frames, double violation_prob) {
  if (!(cbar_nats > 0.0) || !(delay_frames > 0.0))
    throw std::invalid_argument("qos_exponent: arrival rate and delay bound must be positive");
  if (!(violation_prob > 0.0 && violation_prob < 1.0))
    throw std::invalid_argument("qos_exponent: violation probability must lie in (0,1)");
  return -std::log(violation_prob) / (cbar_nats * delay_frames);
}

double total_power(int selected_count, double power_ref, double power_slope) {
  if (selected_count < 0)
    throw std::domain_error("total_power: negative BS count");
  if (selected_count == 0) return 0.0;
  return power_ref + power_slope * (selected_count - 1);
}

double total_power(const Scenario& s, int selected_count) {
  return total_power(selected_count, s.power_ref, s.power_slope);
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("scenario: " + msg);
}

}  // namespace

void Scenario::finalize() {
  require(!bs_positions.empty(), "at least one BS required");
  require(!user_positions.empty(), "at least one user required");
  require(tx_antennas.size() == bs_positions.size(), "tx_antennas size mismatch");
  require(rx_antennas.size() == user_positions.size(), "rx_antennas size mismatch");
  require(qos.size() == user_positions.size(), "qos size mismatch");
  for (int m : tx_antennas) require(m >= 1, "tx antenna count must be >= 1");
  for (int n : rx_antennas) require(n >= 1, "rx antenna count must be >= 1");
  for (const auto& p : bs_positions)
    require(std::isfinite(p.x) && std::isfinite(p.y), "BS position not finite");
  for (const auto& p : user_positions)
    require(std::isfinite(p.x) && std::isfinite(p.y), "user position not finite");
  require(path_loss_exponent >= 2.0 && path_loss_exponent <= 6.0,
          "path_loss_exponent must lie in [2,6]");
  require(frame_duration > 0.0, "frame_duration must be positive");
  require(bandwidth > 0.0, "bandwidth must be positive");
  require(power_ref > 0.0, "power_ref must be positive");
  require(power_slope >= 0.0, "power_slope must be nonnegative");
  require(interference_threshold > 0.0, "interference_threshold must be positive");
  require(grid_resolution > 0.0, "grid_resolution must be positive");

  // 0 dB average gain at 50 m unless G was given explicitly.
  if (gain_constant <= 0.0)
    gain_constant = std::pow(50.0, path_loss_exponent);

  const double ln2 = std::log(2.0);
  for (auto& q : qos) {
    require(q.arrival_rate_bps > 0.0, "arrival rate must be positive");
    require(q.delay_bound_s > 0.0, "delay bound must be positive");
    require(q.violation_prob > 0.0 && q.violation_prob < 1.0,
            "violation probability must lie in (0,1)");
    q.cbar_nats = q.arrival_rate_bps * frame_duration * ln2;
    q.delay_frames = q.delay_bound_s / frame_duration;
    q.theta = qos_exponent(q.cbar_nats, q.delay_frames, q.violation_prob);
  }
}

namespace {

std::vector<Vec2> parse_positions(const json& j, const std::string& field) {
  std::vector<Vec2> out;
  if (!j.contains(field) || !j.at(field).is_array())
    throw std::invalid_argument("scenario: missing or malformed '" + field + "'");
  for (const auto& p : j.at(field)) {
    if (!p.is_array() || p.size() != 2)
      throw std::invalid_argument("scenario: entries of '" + field + "' must be [x, y]");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

std::vector<int> parse_counts(const json& j, const std::string& field, std::size_t n) {
  if (!j.contains(field))
    throw std::invalid_argument("scenario: missing '" + field + "'");
  const auto& v = j.at(field);
  if (v.is_number_integer()) return std::vector<int>(n, v.get<int>());
  std::vector<int> out;
  for (const auto& e : v) out.push_back(e.get<int>());
  return out;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: JSON parse error: ") + e.what());
  }

  Scenario s;
  s.bs_positions = parse_positions(j, "bs_positions");
  s.user_positions = parse_positions(j, "user_positions");
  s.tx_antennas = parse_counts(j, "tx_antennas", s.bs_positions.size());
  s.rx_antennas = parse_counts(j, "rx_antennas", s.user_positions.size());

  const json prop = j.value("propagation", json::object());
  s.path_loss_exponent = prop.value("path_loss_exponent", 4.0);
  s.gain_constant = prop.value("gain_constant", 0.0);

  const json frame = j.value("frame", json::object());
  s.frame_duration = frame.value("duration_s", 0.01);
  s.bandwidth = frame.value("bandwidth_hz", 1e5);

  const json power = j.value("power", json::object());
  s.power_ref = power.value("reference", 1.0);
  s.power_slope = power.value("slope", 1.0);

  const json interf = j.value("interference", json::object());
  s.interference_threshold = interf.value("threshold", 1.0);
  s.grid_resolution = interf.value("grid_resolution_m", 1.0);

  if (!j.contains("qos") || !j.at("qos").is_array())
    throw std::invalid_argument("scenario: missing 'qos' array");
  for (const auto& q : j.at("qos")) {
    QoSSpec spec;
    if (!q.contains("arrival_rate_bps"))
      throw std::invalid_argument("scenario: qos entry missing 'arrival_rate_bps'");
    spec.arrival_rate_bps = q.at("arrival_rate_bps").get<double>();
    spec.delay_bound_s = q.value("delay_bound_ms", 0.0) / 1000.0;
    spec.violation_prob = q.value("violation_prob", 0.0);
    s.qos.push_back(spec);
  }

  s.finalize();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const Scenario& s) {
  json j;
  for (const auto& p : s.bs_positions) j["bs_positions"].push_back({p.x, p.y});
  for (const auto& p : s.user_positions) j["user_positions"].push_back({p.x, p.y});
  j["tx_antennas"] = s.tx_antennas;
  j["rx_antennas"] = s.rx_antennas;
  j["propagation"] = {{"path_loss_exponent", s.path_loss_exponent},
                      {"gain_constant", s.gain_constant}};
  j["frame"] = {{"duration_s", s.frame_duration}, {"bandwidth_hz", s.bandwidth}};
  j["power"] = {{"reference", s.power_ref}, {"slope", s.power_slope}};
  j["interference"] = {{"threshold", s.interference_threshold},
                       {"grid_resolution_m", s.grid_resolution}};
  j["qos"] = json::array();
  for (const auto& q : s.qos)
    j["qos"].push_back({{"arrival_rate_bps", q.arrival_rate_bps},
                        {"delay_bound_ms", q.delay_bound_s * 1000.0},
                        {"violation_prob", q.violation_prob}});
  return j.dump(2);
}

std::string scenario_hash(const Scenario& s) {
  const std::string canon = scenario_to_json_text(s);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace dmimo
