#include "dmimo/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dmimo/qos.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

std::vector<double> compute_cmax_all(const Scenario& s, int mc_frames,
                                     std::uint64_t seed) {
  if (mc_frames < 1)
    throw std::domain_error("compute_cmax: mc_frames must be >= 1");
  std::vector<int> all_bs(s.num_bs());
  std::iota(all_bs.begin(), all_bs.end(), 0);
  const double p_full = total_power(s, s.num_bs());
  const double bt = s.bt_product();

  std::vector<std::vector<double>> rates(s.num_users());
  for (auto& r : rates) r.reserve(mc_frames);
  for (int k = 0; k < mc_frames; ++k) {
    ChannelState state = sample_channel(s, seed, static_cast<std::uint64_t>(k));
    for (int n = 0; n < s.num_users(); ++n)
      rates[n].push_back(mimo_capacity(stacked_channel(state, all_bs, n), p_full, bt));
  }
  std::vector<double> cmax(s.num_users());
  for (int n = 0; n < s.num_users(); ++n)
    cmax[n] = effective_capacity(rates[n], s.qos[n].theta);
  return cmax;
}

double compute_cmax(const Scenario& s, int user, int mc_frames, std::uint64_t seed) {
  return compute_cmax_all(s, mc_frames, seed)[user];
}

std::uint64_t cmax_seed(const Scenario& s) {
  const std::string h = scenario_hash(s);
  std::uint64_t x = 0;
  for (char c : h) x = x * 31 + static_cast<unsigned char>(c);
  return mix_seed(x, 0xC3A5u);
}

ScenarioStats compute_scenario_stats(const Scenario& s, int cmax_frames) {
  ScenarioStats st;
  for (const auto& q : s.qos) {
    st.theta.push_back(q.theta);
    st.cbar.push_back(q.cbar_nats);
  }
  st.cmax = compute_cmax_all(s, cmax_frames, cmax_seed(s));
  st.priority = user_priority_order(st.cbar, st.cmax);
  return st;
}

PriorityOrder user_priority_order(const std::vector<double>& cbar,
                                  const std::vector<double>& cmax) {
  if (cbar.size() != cmax.size())
    throw std::invalid_argument("user_priority_order: size mismatch");
  PriorityOrder out;
  out.fractions.resize(cbar.size());
  for (std::size_t n = 0; n < cbar.size(); ++n) {
    if (!(cmax[n] > 0.0)) {
      if (cbar[n] > 0.0)
        throw std::domain_error("user_priority_order: user with zero C_max cannot carry load");
      out.fractions[n] = 0.0;
    } else {
      out.fractions[n] = cbar[n] / cmax[n];
    }
  }
  out.order.resize(cbar.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    return out.fractions[a] > out.fractions[b];  // ties keep ascending index
  });
  return out;
}

RMatrix aggregate_gain_matrix(const Scenario& s, const ChannelState& state) {
  RMatrix gamma(s.num_users(), s.num_bs());
  for (int n = 0; n < s.num_users(); ++n)
    for (int m = 0; m < s.num_bs(); ++m)
      gamma(n, m) = aggregate_power_gain(state.blocks[n][m], s.tx_antennas[m]);
  return gamma;
}

std::vector<int> priority_bs_sequence(const RMatrix& gamma,
                                      const PriorityOrder& priority) {
  const int n_bs = static_cast<int>(gamma.cols());
  const int n_users = static_cast<int>(gamma.rows());
  std::vector<bool> taken(n_bs, false);
  std::vector<int> seq;
  seq.reserve(n_bs);
  int j = 0;  // position in the priority order; wraps after the last user
  while (static_cast<int>(seq.size()) < n_bs) {
    const int user = priority.order[j];
    int best = -1;
    for (int m = 0; m < n_bs; ++m)
      if (!taken[m] && (best < 0 || gamma(user, m) > gamma(user, best))) best = m;
    taken[best] = true;
    seq.push_back(best);
    j = (j + 1) % n_users;
  }
  return seq;
}

std::vector<int> priority_bs_selection(const RMatrix& gamma,
                                       const PriorityOrder& priority, int L) {
  if (L < 1 || L > gamma.cols())
    throw std::domain_error("priority_bs_selection: L out of range");
  std::vector<int> seq = priority_bs_sequence(gamma, priority);
  seq.resize(L);
  return seq;
}

namespace {

// Average channel power after BD: (1/M_Sigma) E{||H Gamma||_F^2 | Gamma} for
// independent zero-mean entries, expanded entry-wise over the variance matrix.
double average_bd_power(const RMatrix& upsilon, const CMatrix& precoder,
                        double m_sigma) {
  if (precoder.cols() == 0) return 0.0;
  const Eigen::VectorXd row_power = precoder.rowwise().squaredNorm();
  return (upsilon * row_power).sum() / m_sigma;
}

}  // namespace

std::vector<int> active_user_selection(const ChannelState& state, const Scenario& s,
                                       const std::vector<int>& bs_set,
                                       const PriorityOrder& priority) {
  if (bs_set.empty())
    throw std::domain_error("active_user_selection: empty BS set");
  const int n_users = s.num_users();
  double m_sigma = 0.0;
  for (int m : bs_set) m_sigma += s.tx_antennas[m];
  const int width = static_cast<int>(m_sigma);

  std::vector<int> rank_of(n_users);  // position in the priority order
  for (int j = 0; j < n_users; ++j) rank_of[priority.order[j]] = j;

  std::vector<CMatrix> stacked(n_users);
  std::vector<RMatrix> upsilon(n_users);
  for (int n = 0; n < n_users; ++n) {
    stacked[n] = stacked_channel(state, bs_set, n);
    upsilon[n] = average_power_gain_matrix(s, bs_set, n);
  }

  std::vector<int> admitted;
  std::vector<bool> in(n_users, false);
  while (static_cast<int>(admitted.size()) < n_users) {
    // The candidate precoder is the null space of the already-admitted stack,
    // which is shared by every remaining candidate this round.
    std::vector<const CMatrix*> interferers;
    for (int n : admitted) interferers.push_back(&stacked[n]);
    CMatrix basis = null_space_basis(interferers, width);

    int best = -1;
    int best_flag = -1;
    double best_varpi = 0.0;
    for (int n = 0; n < n_users; ++n) {
      if (in[n]) continue;
      const double varpi = average_bd_power(upsilon[n], basis, m_sigma);
      const double inst = (basis.cols() == 0)
                              ? 0.0
                              : (stacked[n] * basis).squaredNorm() / m_sigma;
      const int flag = (varpi > 0.0 && varpi <= inst) ? 1 : 0;
      const bool better =
          best < 0 || flag > best_flag ||
          (flag == best_flag && rank_of[n] < rank_of[best]);
      if (better) {
        best = n;
        best_flag = flag;
        best_varpi = varpi;
      }
    }
    if (best < 0 || !(best_varpi > 0.0)) break;
    admitted.push_back(best);
    in[best] = true;
  }
  return admitted;
}

std::vector<int> single_user_bs_selection(const std::vector<double>& gamma_row,
                                          int L) {
  if (L < 1 || L > static_cast<int>(gamma_row.size()))
    throw std::domain_error("single_user_bs_selection: L out of range");
  std::vector<int> idx(gamma_row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return gamma_row[a] > gamma_row[b]; });
  idx.resize(L);
  return idx;
}

std::vector<CandidateMode> enumerate_candidates(const ChannelState& state,
                                                const Scenario& s,
                                                const PriorityOrder& priority) {
  const int n_bs = s.num_bs();
  const int n_users = s.num_users();
  const double bt = s.bt_product();
  const RMatrix gamma = aggregate_gain_matrix(s, state);
  const std::vector<int> seq = priority_bs_sequence(gamma, priority);

  std::vector<CandidateMode> out;
  out.reserve(1 + n_bs + n_bs * n_users);

  CandidateMode silence;
  silence.mode.kind = ModeKind::Silence;
  out.push_back(std::move(silence));

  for (int L = 1; L <= n_bs; ++L) {
    CandidateMode c;
    c.mode.kind = ModeKind::MultiUser;
    c.mode.bs_set.assign(seq.begin(), seq.begin() + L);
    c.mode.active_users = active_user_selection(state, s, c.mode.bs_set, priority);
    c.power_budget = total_power(s, L);
    if (!c.mode.active_users.empty()) {
      c.precoders = bd_precoders(state, c.mode.bs_set, c.mode.active_users);
      for (const auto& e : c.precoders.entries)
        c.bases.push_back(e.exists ? subchannel_basis(e.effective)
                                   : SubchannelBasis{});
    }
    out.push_back(std::move(c));
  }

  for (int n = 0; n < n_users; ++n) {
    std::vector<double> row(n_bs);
    for (int m = 0; m < n_bs; ++m) row[m] = gamma(n, m);
    for (int L = 1; L <= n_bs; ++L) {
      CandidateMode c;
      c.mode.kind = ModeKind::SingleUser;
      c.mode.bs_set = single_user_bs_selection(row, L);
      c.mode.active_users = {n};
      c.power_budget = total_power(s, L);
      c.bases.push_back(subchannel_basis(stacked_channel(state, c.mode.bs_set, n)));
      c.single_user_rate =
          c.bases[0].snrs.empty()
              ? 0.0
              : waterfill(c.bases[0].snrs, c.power_budget, bt).rate;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace dmimo
