#pragma once

#include <vector>

#include "dmimo/channel.hpp"

namespace dmimo {

// Water-filling over parallel subchannels with a common water level.
struct WaterfillResult {
  std::vector<double> snrs;    // epsilon_z, descending
  std::vector<double> powers;  // rho_z >= 0, sum = total power
  double water_level = 0.0;    // mu
  int active_count = 0;        // i*
  double rate = 0.0;           // nats per frame
};

// Exact piecewise-linear water-level solve; `snrs` must be sorted descending
// and strictly positive.
WaterfillResult waterfill(std::vector<double> snrs, double total_power,
                          double bt_product);

// Subchannel SNRs (squared nonzero singular values, descending) and the
// matching right singular vectors; the transmit covariance achieving the
// water-filled rate is V diag(rho) V^dag.
struct SubchannelBasis {
  std::vector<double> snrs;
  CMatrix right_vectors;  // one column per entry of snrs
};

SubchannelBasis subchannel_basis(const CMatrix& h);

// Single-user MIMO capacity with total power P: water-filling over the
// squared singular values of H. Rank-0 H gives rate 0.
double mimo_capacity(const CMatrix& h, double total_power, double bt_product);
WaterfillResult mimo_capacity_detail(const CMatrix& h, double total_power,
                                     double bt_product);

// dR/dP = BT / mu at the current allocation.
double rate_derivative(const WaterfillResult& wf, double bt_product);

// Block-diagonalization precoders for an active-user set: each user's
// precoder spans the null space of the other active users' stacked channels.
struct BdPrecoderSet {
  struct Entry {
    bool exists = false;
    CMatrix precoder;   // orthonormal columns
    CMatrix effective;  // H_Omega^(n) * precoder
  };
  std::vector<Entry> entries;  // parallel to the active-user list
};

BdPrecoderSet bd_precoders(const ChannelState& state,
                           const std::vector<int>& bs_set,
                           const std::vector<int>& active_users);

// Null-space basis of the vertical stack of the given matrices over a
// `width`-dimensional input space; empty stack yields the identity.
CMatrix null_space_basis(const std::vector<const CMatrix*>& stack, int width);

// Rate of a BD effective channel; 0 when the precoder does not exist or P=0.
double bd_rate(const BdPrecoderSet::Entry& entry, double power, double bt_product);

}  // namespace dmimo
