#pragma once

#include <random>
#include <vector>

#include "dmimo/policy.hpp"

namespace dmimo {

// Per-state optimal power split across the active users of a multi-user mode.
struct SplitResult {
  std::vector<double> power;  // per user (global index), sums to the budget
  std::vector<double> rate;   // nats per frame
  std::vector<double> mu;     // water level per funded user, 0 otherwise
  std::vector<int> istar;     // active subchannels per funded user
  double zeta = 0.0;          // power-budget multiplier; 0 if < 2 funded users
  int funded = 0;
};

// Solves the per-state KKT system: a common multiplier zeta prices the power
// budget, each funded user water-fills at the level the stationarity
// condition dictates. Users with lambda == 0 or no subchannels get nothing.
// `zeta_hint` warm-starts the root search (0 = cold).
SplitResult optimal_power_split(const std::vector<UserSplitData>& users,
                                const std::vector<double>& lambda,
                                const std::vector<double>& theta,
                                double total_power, double bt_product,
                                double zeta_hint = 0.0);

// One fading state solved: chosen slot, all scores, resulting service rates.
struct InnerChoice {
  int chosen = 0;  // candidate slot (see single_user_slot layout)
  int L = 0;
  std::vector<double> scores;         // per slot; +inf for excluded slots
  std::vector<double> probabilities;  // equal split over exact score ties
  std::vector<double> user_rates;     // effective per-user service rates
  std::vector<SplitResult> splits;    // per multi-user L (BD-PT only)
};

// BD-PT mode choice: psi_L for multi-user slots (with optimal splits),
// psi_{L,n} for single-user slots, sum of lambdas for silence.
InnerChoice bdpt_choose(const FrameData& fd, const std::vector<double>& lambda,
                        const std::vector<double>& theta,
                        const std::vector<double>& power_budget, double bt_product,
                        std::mt19937_64& tie_rng,
                        std::vector<double>* zeta_warm = nullptr);

// PT-only: the same score rule restricted to single-user slots + silence.
InnerChoice ptonly_choose(const FrameData& fd, const std::vector<double>& lambda,
                          const std::vector<double>& theta,
                          std::mt19937_64& tie_rng);

}  // namespace dmimo
