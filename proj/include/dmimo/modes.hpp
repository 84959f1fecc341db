#pragma once

#include <cstdint>
#include <vector>

#include "dmimo/channel.hpp"
#include "dmimo/rates.hpp"

namespace dmimo {

// Users sorted by descending effective-capacity fraction cbar_n / cmax_n.
struct PriorityOrder {
  std::vector<int> order;      // order[j] = user with the (j+1)-th largest fraction
  std::vector<double> fractions;  // indexed by user
};

enum class ModeKind { Silence, MultiUser, SingleUser };

// A BS subset paired with an active-user set.
struct TransmissionMode {
  ModeKind kind = ModeKind::Silence;
  std::vector<int> bs_set;        // Omega_L, selection order
  std::vector<int> active_users;  // U_L, admission order
  int cardinality() const { return static_cast<int>(bs_set.size()); }
};

// A candidate mode with everything the per-state optimizers need cached:
// BD precoders and subchannel decompositions for multi-user modes, the
// subchannel decomposition and full-power rate for single-user modes.
struct CandidateMode {
  TransmissionMode mode;
  double power_budget = 0.0;           // P_L
  BdPrecoderSet precoders;             // multi-user; parallel to active_users
  std::vector<SubchannelBasis> bases;  // per active user (multi) or size 1 (single)
  double single_user_rate = 0.0;       // R_Omega^(n) at P_L, nats per frame
};

// Off-line per-scenario quantities shared by all schemes.
struct ScenarioStats {
  std::vector<double> theta;  // per user, 1/nat
  std::vector<double> cbar;   // per user, nats per frame
  std::vector<double> cmax;   // Monte-Carlo C_max^(n)
  PriorityOrder priority;
};

// Monte-Carlo estimate of the maximum achievable effective capacity: the
// effective capacity of the full-set single-user MIMO rate at P_{K_bs}.
std::vector<double> compute_cmax_all(const Scenario& s, int mc_frames,
                                     std::uint64_t seed);
double compute_cmax(const Scenario& s, int user, int mc_frames, std::uint64_t seed);

// C_max uses its own seed derived from the scenario itself, so the priority
// order is a property of the scenario rather than of any particular run.
std::uint64_t cmax_seed(const Scenario& s);

ScenarioStats compute_scenario_stats(const Scenario& s, int cmax_frames = 20000);

PriorityOrder user_priority_order(const std::vector<double>& cbar,
                                  const std::vector<double>& cmax);

// Instantaneous aggregate gains gamma_{n,m} for the whole state.
RMatrix aggregate_gain_matrix(const Scenario& s, const ChannelState& state);

// Round-robin priority selection sequence over all K_bs BSs; Omega_L is its
// length-L prefix.
std::vector<int> priority_bs_sequence(const RMatrix& gamma,
                                      const PriorityOrder& priority);
std::vector<int> priority_bs_selection(const RMatrix& gamma,
                                       const PriorityOrder& priority, int L);

// Greedy joint channel-priority active-user selection for a fixed Omega_L.
std::vector<int> active_user_selection(const ChannelState& state, const Scenario& s,
                                       const std::vector<int>& bs_set,
                                       const PriorityOrder& priority);

// Indices of the L largest entries of one user's gain row, ties by index.
std::vector<int> single_user_bs_selection(const std::vector<double>& gamma_row,
                                          int L);

// Silence + K_bs multi-user modes + K_bs*K_mu single-user modes, with
// cached decompositions. Order: silence, multi L=1..K_bs, then single-user
// modes grouped by user with L=1..K_bs.
std::vector<CandidateMode> enumerate_candidates(const ChannelState& state,
                                                const Scenario& s,
                                                const PriorityOrder& priority);

}  // namespace dmimo
