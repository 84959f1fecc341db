#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dmimo/scenario.hpp"

namespace dmimo {

using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

// One block-fading realization: H_{n,m} for every (user n, BS m).
struct ChannelState {
  std::vector<std::vector<CMatrix>> blocks;  // [user][bs], N_n x M_m
  std::uint64_t frame_index = 0;
};

// Average power gain G / d^eta.
double path_gain(double distance, double gain_constant, double path_loss_exponent);

double bs_user_distance(const Scenario& s, int user, int bs);
double mean_gain(const Scenario& s, int user, int bs);

// Draws all blocks i.i.d. CN(0, hbar_{n,m}); deterministic given
// (scenario, seed, frame_index) and independent of draw order across frames.
ChannelState sample_channel(const Scenario& s, std::uint64_t seed,
                            std::uint64_t frame_index = 0);

// gamma_{n,m} = ||H||_F^2 / M_m.
double aggregate_power_gain(const CMatrix& block, int tx_antennas);

// Horizontal concatenation of H_{n,i} over i in bs_set (stored order).
CMatrix stacked_channel(const ChannelState& state, const std::vector<int>& bs_set,
                        int user);

// Entry-wise variance matrix matching stacked_channel's shape.
RMatrix average_power_gain_matrix(const Scenario& s, const std::vector<int>& bs_set,
                                  int user);

}  // namespace dmimo
