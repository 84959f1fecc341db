#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dmimo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Per-user delay-QoS requirement. Rates are stored both in the config unit
// (bits/s) and in the internal unit (nats per frame); the QoS exponent is
// per nat so that theta * R is dimensionless for internal rates.
struct QoSSpec {
  double arrival_rate_bps = 0.0;
  double delay_bound_s = 0.0;
  double violation_prob = 0.0;
  // Derived at scenario finalization.
  double cbar_nats = 0.0;      // arrival per frame, nats
  double delay_frames = 0.0;   // delay bound, frames
  double theta = 0.0;          // QoS exponent, 1/nat
};

// Static world description: geometry, propagation, power law, QoS targets.
struct Scenario {
  std::vector<Vec2> bs_positions;
  std::vector<Vec2> user_positions;
  std::vector<int> tx_antennas;     // M_m per BS
  std::vector<int> rx_antennas;     // N_n per user
  double path_loss_exponent = 4.0;  // eta
  double gain_constant = 0.0;       // G; 0 requests the 0 dB @ 50 m calibration
  double frame_duration = 0.01;     // T, seconds
  double bandwidth = 1e5;           // B, Hz
  double power_ref = 1.0;           // P_ref
  double power_slope = 1.0;         // kappa
  double interference_threshold = 1.0;  // sigma^2_th
  double grid_resolution = 1.0;     // meters, interfering-area integration
  std::vector<QoSSpec> qos;

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  double bt_product() const { return bandwidth * frame_duration; }
  int total_tx_antennas() const;

  // Fills derived QoS fields and the calibrated gain constant; throws
  // std::invalid_argument on any invariant violation.
  void finalize();
};

// Key/value config with nested sections (JSON). Calls finalize().
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

// FNV-1a over the canonical serialized form; used to pair policies with the
// scenario they were trained on.
std::string scenario_hash(const Scenario& s);

// theta = -ln(xi) / (cbar * D_th), in internal units (1/nat).
double qos_exponent(double cbar_nats, double delay_frames, double violation_prob);

// P_L = P_ref + kappa (L - 1) for L >= 1, and 0 for L = 0.
double total_power(int selected_count, double power_ref, double power_slope);
double total_power(const Scenario& s, int selected_count);

}  // namespace dmimo
