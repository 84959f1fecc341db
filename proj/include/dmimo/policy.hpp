#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmimo/modes.hpp"
#include "dmimo/scenario.hpp"

namespace dmimo {

enum class Scheme { BdPt, Tdma, PtOnly };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

enum class TrainStatus { Converged, Infeasible, IterationLimit };

struct AscentConfig {
  double step0 = 1.0;
  double tolerance = 1e-3;     // on the max binding constraint slack
  double lambda_cap = 1e6;
  double lambda_soft = 1e3;    // iteration-cap infeasibility guard
  int max_iterations = 50000;
  int training_frames = 2000;
  int cmax_frames = 20000;
};

// Trained dual multipliers plus convergence metadata; fully determines the
// per-state behavior of a scheme.
struct DualState {
  Scheme scheme = Scheme::BdPt;
  std::vector<double> lambda;
  TrainStatus status = TrainStatus::IterationLimit;
  int iterations = 0;
  double max_binding_slack = 0.0;
  std::vector<double> final_slack;
  std::string scenario_hash;
  std::uint64_t train_seed = 0;
  int training_frames = 0;
  std::string notes;

  bool feasible() const { return status == TrainStatus::Converged; }
};

void save_policy(const std::string& path, const DualState& policy);
DualState load_policy(const std::string& path);

// ---------------------------------------------------------------------------
// Compact per-frame data the inner solvers run on. Rebuilding this once per
// frame (evaluation) or once per training set (dual ascent) keeps the ascent
// iterations free of any SVD work.

// Water-filling inputs for one user's effective channel, in prefix form.
struct UserSplitData {
  int z = 0;                           // subchannel count; 0 = cannot be funded
  double eps1 = 0.0;                   // largest subchannel SNR
  std::vector<double> inv_eps;         // 1/eps_i, ascending, size z
  std::vector<double> ln_eps_prefix;   // sum_{j<=i} ln eps_j, size z
  std::vector<double> inv_eps_prefix;  // sum_{j<=i} 1/eps_j, size z
};

UserSplitData make_split_data(const std::vector<double>& snrs);

// Closed-form water-filling rate from prefix data (nats per frame).
double split_rate(const UserSplitData& u, double power, double bt_product);

struct FrameData {
  // [L-1][user]; z == 0 when the user is inactive or has no precoder.
  std::vector<std::vector<UserSplitData>> multi;
  // Single-user rates over the norm-selected BS subsets, [L-1][user].
  std::vector<std::vector<double>> single_rate;
  // Single-user rates over the priority-selected subsets (TDMA), [L-1][user].
  std::vector<std::vector<double>> tdma_rate;
  std::uint64_t frame_index = 0;
};

// Candidate slot layout shared by the solvers and enumerate_candidates:
// slot 0 = silence, slots 1..K_bs = multi-user modes, then single-user modes
// grouped by user. Slot count = 1 + K_bs + K_bs*K_mu.
int single_user_slot(int n_bs, int user, int L);

// Builds the BD-PT / PT-only part of FrameData from enumerated candidates.
FrameData frame_data_from_candidates(const std::vector<CandidateMode>& candidates,
                                     const Scenario& s);

// Adds TDMA rates (priority BS prefixes, full power during the slot).
void fill_tdma_rates(FrameData& fd, const ChannelState& state, const Scenario& s,
                     const PriorityOrder& priority);

// ---------------------------------------------------------------------------
// Offline dual ascent shared by all schemes: projected subgradient steps on
// lambda over a fixed training frame set (common random numbers).
DualState train_dual(const Scenario& s, const ScenarioStats& stats, Scheme scheme,
                     const AscentConfig& cfg, std::uint64_t seed,
                     std::vector<std::string>* convergence_log = nullptr);

}  // namespace dmimo
