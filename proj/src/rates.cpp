#include "dmimo/rates.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace dmimo {

namespace {
constexpr double kRankTolerance = 1e-10;  // relative to the largest singular value
}

WaterfillResult waterfill(std::vector<double> snrs, double total_power,
                          double bt_product) {
  if (snrs.empty())
    throw std::domain_error("waterfill: empty SNR list");
  for (std::size_t z = 0; z < snrs.size(); ++z) {
    if (!(snrs[z] > 0.0))
      throw std::domain_error("waterfill: SNRs must be positive");
    if (z > 0 && snrs[z] > snrs[z - 1])
      throw std::domain_error("waterfill: SNRs must be sorted descending");
  }
  if (total_power < 0.0)
    throw std::domain_error("waterfill: negative power");

  WaterfillResult out;
  out.snrs = std::move(snrs);
  const int z_count = static_cast<int>(out.snrs.size());
  out.powers.assign(z_count, 0.0);
  if (total_power == 0.0) {
    out.water_level = 1.0 / out.snrs[0];
    return out;
  }

  // mu is affine in P within each bin [1/eps_i, 1/eps_{i+1}); take the first
  // bin whose level stays below the next inverse SNR (sentinel infinity).
  double inv_sum = 0.0;
  double mu = 0.0;
  int active = 0;
  for (int i = 1; i <= z_count; ++i) {
    inv_sum += 1.0 / out.snrs[i - 1];
    mu = (total_power + inv_sum) / i;
    const double next_inv = (i < z_count) ? 1.0 / out.snrs[i] : 0.0;
    if (i == z_count || mu < next_inv) {
      active = i;
      break;
    }
  }

  out.water_level = mu;
  out.active_count = active;
  double rate = 0.0;
  for (int z = 0; z < active; ++z) {
    out.powers[z] = mu - 1.0 / out.snrs[z];
    rate += std::log1p(out.snrs[z] * out.powers[z]);
  }
  out.rate = bt_product * rate;
  return out;
}

SubchannelBasis subchannel_basis(const CMatrix& h) {
  SubchannelBasis out;
  if (h.size() == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return out;
  const double tol = kRankTolerance * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol && sv(i) > 0.0) ++rank;
  out.snrs.reserve(rank);
  for (int i = 0; i < rank; ++i) out.snrs.push_back(sv(i) * sv(i));
  out.right_vectors = svd.matrixV().leftCols(rank);
  return out;
}

WaterfillResult mimo_capacity_detail(const CMatrix& h, double total_power,
                                     double bt_product) {
  SubchannelBasis basis = subchannel_basis(h);
  if (basis.snrs.empty()) return WaterfillResult{};
  return waterfill(std::move(basis.snrs), total_power, bt_product);
}

double mimo_capacity(const CMatrix& h, double total_power, double bt_product) {
  return mimo_capacity_detail(h, total_power, bt_product).rate;
}

double rate_derivative(const WaterfillResult& wf, double bt_product) {
  if (!(wf.water_level > 0.0))
    throw std::domain_error("rate_derivative: empty allocation");
  return bt_product / wf.water_level;
}

CMatrix null_space_basis(const std::vector<const CMatrix*>& stack, int width) {
  Eigen::Index rows = 0;
  for (const CMatrix* m : stack) rows += m->rows();
  if (rows == 0) return CMatrix::Identity(width, width);

  CMatrix stacked(rows, width);
  Eigen::Index r = 0;
  for (const CMatrix* m : stack) {
    stacked.middleRows(r, m->rows()) = *m;
    r += m->rows();
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = (sv.size() > 0) ? kRankTolerance * sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol && sv(i) > 0.0) ++rank;
  return svd.matrixV().rightCols(width - rank);
}

BdPrecoderSet bd_precoders(const ChannelState& state,
                           const std::vector<int>& bs_set,
                           const std::vector<int>& active_users) {
  if (active_users.empty())
    throw std::domain_error("bd_precoders: empty active-user set");

  std::vector<CMatrix> stacked;
  stacked.reserve(active_users.size());
  for (int n : active_users) stacked.push_back(stacked_channel(state, bs_set, n));
  const int width = static_cast<int>(stacked[0].cols());

  BdPrecoderSet out;
  out.entries.resize(active_users.size());
  for (std::size_t u = 0; u < active_users.size(); ++u) {
    std::vector<const CMatrix*> interferers;
    for (std::size_t i = 0; i < active_users.size(); ++i)
      if (i != u) interferers.push_back(&stacked[i]);
    CMatrix basis = null_space_basis(interferers, width);
    auto& e = out.entries[u];
    if (basis.cols() == 0) continue;
    e.exists = true;
    e.precoder = std::move(basis);
    e.effective = stacked[u] * e.precoder;
  }
  return out;
}

double bd_rate(const BdPrecoderSet::Entry& entry, double power, double bt_product) {
  if (power < 0.0)
    throw std::domain_error("bd_rate: negative power");
  if (!entry.exists || power == 0.0) return 0.0;
  return mimo_capacity(entry.effective, power, bt_product);
}

}  // namespace dmimo
