#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmimo/bdpt.hpp"
#include "dmimo/policy.hpp"
#include "dmimo/tdma.hpp"

namespace dmimo {

// Precomputed path gains from every BS to every integration grid point.
// The grid covers the BS bounding box padded by the worst-case interfering
// radius, so the indicator is identically zero outside it.
struct AreaGrid {
  RMatrix gains;          // points x K_bs, G / d^eta
  double cell_area = 0.0; // m^2
  double pad = 0.0;       // padding radius used, m
};

AreaGrid make_area_grid(const Scenario& s);

// Area (m^2) where the aggregate received power meets the threshold.
double interfering_area(const AreaGrid& grid,
                        const std::vector<double>& per_bs_power,
                        double threshold);

// Adds each selected BS's share of the radiated power: the precoder's rows
// are partitioned by the antenna counts of bs_set, and subchannel i carries
// subchannel_powers[i] through column i.
void accumulate_bs_power(std::vector<double>& per_bs, const Scenario& s,
                         const std::vector<int>& bs_set, const CMatrix& precoder,
                         const std::vector<double>& subchannel_powers,
                         double weight = 1.0);

// Radiated power per BS for one fading state under the chosen mode; the
// entries sum to P_L (time-weighted for TDMA) whenever anything transmits.
std::vector<double> frame_bs_power(const Scenario& s, const ChannelState& state,
                                   const ScenarioStats& stats, Scheme scheme,
                                   const std::vector<CandidateMode>& candidates,
                                   const InnerChoice& inner,
                                   const TdmaChoice& tdma);

struct Metrics {
  double avg_bs_usage = 0.0;
  double bs_usage_se = 0.0;
  double avg_area = 0.0;
  double area_se = 0.0;
  std::vector<double> per_user_mean_exp;   // E{e^{-theta R}}
  std::vector<double> per_user_slack;      // mean_exp - e^{-theta cbar}
  std::vector<double> per_user_mean_rate;  // nats per frame
  int frames = 0;
};

struct SimOptions {
  bool compute_area = true;
  int workers = 1;  // frames partition across threads; merge order is fixed
};

// Streams `frames` fresh fading states through the trained policy and
// accumulates the usage, interfering-area, and QoS statistics.
Metrics run_simulation(const Scenario& s, const ScenarioStats& stats,
                       const DualState& policy, int frames, std::uint64_t seed,
                       const SimOptions& opts = {});

// Train-then-evaluate for one scenario point.
struct PointResult {
  DualState policy;
  Metrics metrics;
};

PointResult run_point(const Scenario& s, Scheme scheme, const AscentConfig& cfg,
                      std::uint64_t seed, int eval_frames,
                      const SimOptions& opts = {});

struct SweepRow {
  Scheme scheme = Scheme::BdPt;
  std::string param;
  double value = 0.0;
  Metrics metrics;
  DualState policy;
};

// Applies one sweep value to a copy of the base scenario. "load" sets every
// user's arrival rate (bits/s); "kappa" sets the power-slope coefficient.
Scenario apply_sweep_value(const Scenario& base, const std::string& param,
                           double value);

// Retrains and evaluates each scheme at each grid value. Infeasible points
// are still evaluated with the final multipliers and flagged in the row.
std::vector<SweepRow> sweep(const Scenario& base, const std::vector<Scheme>& schemes,
                            const std::string& param,
                            const std::vector<double>& values,
                            const AscentConfig& cfg, std::uint64_t seed,
                            int eval_frames, const SimOptions& opts = {});

// CSV contract: scheme,swept_param,value,L_bar,L_bar_se,area,area_se,
// slack_1..slack_K,feasible.
std::string sweep_csv(const std::vector<SweepRow>& rows, int n_users);

}  // namespace dmimo
