#pragma once

#include <random>
#include <vector>

#include "dmimo/policy.hpp"

namespace dmimo {

// Optimal normalized slot lengths within one BS subset.
struct TimeShareResult {
  std::vector<double> t;   // per user, sums to 1
  double delta = 0.0;      // time-budget multiplier
  bool degenerate = false; // no user with lambda*theta*R > 0: uniform shares
};

// t_n = [ (1/(theta_n R_n)) ln(lambda_n theta_n R_n / delta) ]^+ with delta
// chosen by monotone root-finding so the shares sum to 1.
TimeShareResult time_shares(const std::vector<double>& rates,
                            const std::vector<double>& lambda,
                            const std::vector<double>& theta);

struct TdmaChoice {
  int L = 0;                           // chosen cardinality, 0 = silence
  std::vector<double> scores;          // per L = 0..K_bs
  std::vector<double> probabilities;
  std::vector<TimeShareResult> shares; // per L = 1..K_bs
  std::vector<double> user_rates;      // t_{L,n} * R at the chosen L
};

// Scores ell + sum_n lambda_n exp(-theta_n t*_n R_n) with each candidate ell
// scored at its own optimal shares; ties split equally.
TdmaChoice tdma_choose(const FrameData& fd, const std::vector<double>& lambda,
                       const std::vector<double>& theta,
                       std::mt19937_64& tie_rng);

}  // namespace dmimo
