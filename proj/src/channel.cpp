#include "dmimo/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "dmimo/rng.hpp"

namespace dmimo {

double path_gain(double distance, double gain_constant, double path_loss_exponent) {
  if (!(distance > 0.0))
    throw std::domain_error("path_gain: distance must be positive");
  return gain_constant / std::pow(distance, path_loss_exponent);
}

double bs_user_distance(const Scenario& s, int user, int bs) {
  const double dx = s.user_positions[user].x - s.bs_positions[bs].x;
  const double dy = s.user_positions[user].y - s.bs_positions[bs].y;
  return std::hypot(dx, dy);
}

double mean_gain(const Scenario& s, int user, int bs) {
  return path_gain(bs_user_distance(s, user, bs), s.gain_constant,
                   s.path_loss_exponent);
}

ChannelState sample_channel(const Scenario& s, std::uint64_t seed,
                            std::uint64_t frame_index) {
  ChannelState state;
  state.frame_index = frame_index;
  state.blocks.resize(s.num_users());
  auto rng = frame_rng(seed, frame_index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int n = 0; n < s.num_users(); ++n) {
    state.blocks[n].resize(s.num_bs());
    for (int m = 0; m < s.num_bs(); ++m) {
      const double sigma = std::sqrt(mean_gain(s, n, m) / 2.0);
      CMatrix h(s.rx_antennas[n], s.tx_antennas[m]);
      for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < h.cols(); ++j)
          h(i, j) = std::complex<double>(sigma * gauss(rng), sigma * gauss(rng));
      state.blocks[n][m] = std::move(h);
    }
  }
  return state;
}

double aggregate_power_gain(const CMatrix& block, int tx_antennas) {
  return block.squaredNorm() / static_cast<double>(tx_antennas);
}

CMatrix stacked_channel(const ChannelState& state, const std::vector<int>& bs_set,
                        int user) {
  if (bs_set.empty())
    throw std::domain_error("stacked_channel: empty BS set");
  std::unordered_set<int> seen(bs_set.begin(), bs_set.end());
  if (seen.size() != bs_set.size())
    throw std::domain_error("stacked_channel: duplicate BS indices");

  const auto& row = state.blocks[user];
  Eigen::Index width = 0;
  for (int m : bs_set) width += row[m].cols();
  CMatrix out(row[bs_set[0]].rows(), width);
  Eigen::Index col = 0;
  for (int m : bs_set) {
    out.middleCols(col, row[m].cols()) = row[m];
    col += row[m].cols();
  }
  return out;
}

RMatrix average_power_gain_matrix(const Scenario& s, const std::vector<int>& bs_set,
                                  int user) {
  Eigen::Index width = 0;
  for (int m : bs_set) width += s.tx_antennas[m];
  RMatrix out(s.rx_antennas[user], width);
  Eigen::Index col = 0;
  for (int m : bs_set) {
    out.middleCols(col, s.tx_antennas[m]).setConstant(mean_gain(s, user, m));
    col += s.tx_antennas[m];
  }
  return out;
}

}  // namespace dmimo
