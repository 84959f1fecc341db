#include "dmimo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dmimo/bdpt.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/tdma.hpp"

namespace dmimo {

namespace {

constexpr std::uint64_t kTieSalt = 0x7169u;

double sample_se(double sum, double sumsq, int n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

}  // namespace

AreaGrid make_area_grid(const Scenario& s) {
  const int n_bs = s.num_bs();
  const double p_max = total_power(s, n_bs);
  // Beyond this radius from every BS even the full radiated power is below
  // threshold, so the indicator vanishes.
  const double pad = std::pow(s.gain_constant * std::max(p_max, s.power_ref) /
                                  s.interference_threshold,
                              1.0 / s.path_loss_exponent);

  double xmin = s.bs_positions[0].x, xmax = xmin;
  double ymin = s.bs_positions[0].y, ymax = ymin;
  for (const Vec2& p : s.bs_positions) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;

  const double h = s.grid_resolution;
  const int nx = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / h)));
  const int ny = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / h)));

  AreaGrid grid;
  grid.cell_area = h * h;
  grid.pad = pad;
  grid.gains.resize(static_cast<Eigen::Index>(nx) * ny, n_bs);
  Eigen::Index row = 0;
  for (int ix = 0; ix < nx; ++ix) {
    const double x = xmin + (ix + 0.5) * h;
    for (int iy = 0; iy < ny; ++iy, ++row) {
      const double y = ymin + (iy + 0.5) * h;
      for (int b = 0; b < n_bs; ++b) {
        const double dx = x - s.bs_positions[b].x;
        const double dy = y - s.bs_positions[b].y;
        const double d = std::sqrt(dx * dx + dy * dy);
        // Clamp at half a cell so a point coinciding with a BS stays finite.
        const double d_eff = std::max(d, 0.5 * h);
        grid.gains(row, b) = path_gain(d_eff, s.gain_constant, s.path_loss_exponent);
      }
    }
  }
  return grid;
}

double interfering_area(const AreaGrid& grid,
                        const std::vector<double>& per_bs_power,
                        double threshold) {
  const Eigen::Map<const Eigen::VectorXd> p(per_bs_power.data(),
                                            per_bs_power.size());
  if (p.maxCoeff() <= 0.0) return 0.0;
  const Eigen::VectorXd rx = grid.gains * p;
  const Eigen::Index hits = (rx.array() >= threshold).count();
  return hits * grid.cell_area;
}

void accumulate_bs_power(std::vector<double>& per_bs, const Scenario& s,
                         const std::vector<int>& bs_set, const CMatrix& precoder,
                         const std::vector<double>& subchannel_powers,
                         double weight) {
  const int n_cols = std::min<int>(static_cast<int>(precoder.cols()),
                                   static_cast<int>(subchannel_powers.size()));
  Eigen::Index row = 0;
  for (int b : bs_set) {
    const int m = s.tx_antennas[b];
    double acc = 0.0;
    for (int c = 0; c < n_cols; ++c)
      acc += subchannel_powers[c] * precoder.block(row, c, m, 1).squaredNorm();
    per_bs[b] += weight * acc;
    row += m;
  }
}

std::vector<double> frame_bs_power(const Scenario& s, const ChannelState& state,
                                   const ScenarioStats& stats, Scheme scheme,
                                   const std::vector<CandidateMode>& candidates,
                                   const InnerChoice& inner,
                                   const TdmaChoice& tdma) {
  const int n_bs = s.num_bs();
  const double bt = s.bt_product();
  std::vector<double> per_bs(n_bs, 0.0);

  if (scheme == Scheme::Tdma) {
    if (tdma.L == 0) return per_bs;
    const RMatrix gamma = aggregate_gain_matrix(s, state);
    const std::vector<int> seq = priority_bs_sequence(gamma, stats.priority);
    const std::vector<int> omega(seq.begin(), seq.begin() + tdma.L);
    const double p_budget = total_power(s, tdma.L);
    const TimeShareResult& sh = tdma.shares[tdma.L - 1];
    for (int n = 0; n < s.num_users(); ++n) {
      if (sh.t[n] <= 0.0) continue;
      const SubchannelBasis basis = subchannel_basis(stacked_channel(state, omega, n));
      if (basis.snrs.empty()) continue;
      const WaterfillResult wf = waterfill(basis.snrs, p_budget, bt);
      accumulate_bs_power(per_bs, s, omega, basis.right_vectors, wf.powers, sh.t[n]);
    }
    return per_bs;
  }

  if (inner.chosen == 0) return per_bs;
  if (inner.chosen <= n_bs) {
    const CandidateMode& c = candidates[inner.chosen];
    const SplitResult& split = inner.splits[inner.chosen - 1];
    for (std::size_t u = 0; u < c.mode.active_users.size(); ++u) {
      const int user = c.mode.active_users[u];
      if (split.power[user] <= 0.0 || !c.precoders.entries[u].exists) continue;
      const WaterfillResult wf = waterfill(c.bases[u].snrs, split.power[user], bt);
      const CMatrix w = c.precoders.entries[u].precoder * c.bases[u].right_vectors;
      accumulate_bs_power(per_bs, s, c.mode.bs_set, w, wf.powers);
    }
    return per_bs;
  }

  const CandidateMode& c = candidates[inner.chosen];
  if (!c.bases.empty() && !c.bases[0].snrs.empty()) {
    const WaterfillResult wf = waterfill(c.bases[0].snrs, c.power_budget, bt);
    accumulate_bs_power(per_bs, s, c.mode.bs_set, c.bases[0].right_vectors,
                        wf.powers);
  }
  return per_bs;
}

namespace {

struct Accum {
  double l_sum = 0.0, l_sumsq = 0.0, a_sum = 0.0, a_sumsq = 0.0;
  std::vector<double> exp_sum, rate_sum;
};

}  // namespace

Metrics run_simulation(const Scenario& s, const ScenarioStats& stats,
                       const DualState& policy, int frames, std::uint64_t seed,
                       const SimOptions& opts) {
  const int n_users = s.num_users();
  const int n_bs = s.num_bs();
  const double bt = s.bt_product();
  const Scheme scheme = policy.scheme;

  std::vector<double> power_budget(n_bs);
  for (int L = 1; L <= n_bs; ++L) power_budget[L - 1] = total_power(s, L);

  AreaGrid grid;
  if (opts.compute_area) grid = make_area_grid(s);

  auto process_range = [&](int begin, int end, Accum& acc) {
    acc.exp_sum.assign(n_users, 0.0);
    acc.rate_sum.assign(n_users, 0.0);
    for (int k = begin; k < end; ++k) {
    const ChannelState state = sample_channel(s, seed, static_cast<std::uint64_t>(k));
    std::mt19937_64 tie_rng = frame_rng(seed, static_cast<std::uint64_t>(k), kTieSalt);

    std::vector<CandidateMode> candidates;
    FrameData fd;
    InnerChoice inner;
    TdmaChoice tdma;
    int chosen_l = 0;
    std::vector<double> rates(n_users, 0.0);

    if (scheme == Scheme::Tdma) {
      fill_tdma_rates(fd, state, s, stats.priority);
      tdma = tdma_choose(fd, policy.lambda, stats.theta, tie_rng);
      chosen_l = tdma.L;
      rates = tdma.user_rates;
    } else {
      candidates = enumerate_candidates(state, s, stats.priority);
      fd = frame_data_from_candidates(candidates, s);
      inner = (scheme == Scheme::BdPt)
                  ? bdpt_choose(fd, policy.lambda, stats.theta, power_budget, bt,
                                tie_rng)
                  : ptonly_choose(fd, policy.lambda, stats.theta, tie_rng);
      chosen_l = inner.L;
      rates = inner.user_rates;
    }

      acc.l_sum += chosen_l;
      acc.l_sumsq += static_cast<double>(chosen_l) * chosen_l;
      for (int n = 0; n < n_users; ++n) {
        acc.exp_sum[n] += std::exp(-stats.theta[n] * rates[n]);
        acc.rate_sum[n] += rates[n];
      }

      if (opts.compute_area) {
        const std::vector<double> per_bs =
            frame_bs_power(s, state, stats, scheme, candidates, inner, tdma);
        const double area = interfering_area(grid, per_bs, s.interference_threshold);
        acc.a_sum += area;
        acc.a_sumsq += area * area;
      }
    }
  };

  const int workers = std::clamp(opts.workers, 1, std::max(1, frames));
  std::vector<Accum> parts(workers);
  if (workers == 1) {
    process_range(0, frames, parts[0]);
  } else {
    std::vector<std::thread> threads;
    const int chunk = (frames + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(frames, begin + chunk);
      threads.emplace_back(process_range, begin, end, std::ref(parts[w]));
    }
    for (auto& t : threads) t.join();
  }

  Accum total;
  total.exp_sum.assign(n_users, 0.0);
  total.rate_sum.assign(n_users, 0.0);
  for (const Accum& p : parts) {
    total.l_sum += p.l_sum;
    total.l_sumsq += p.l_sumsq;
    total.a_sum += p.a_sum;
    total.a_sumsq += p.a_sumsq;
    for (int n = 0; n < n_users; ++n) {
      total.exp_sum[n] += p.exp_sum[n];
      total.rate_sum[n] += p.rate_sum[n];
    }
  }

  Metrics m;
  m.frames = frames;
  m.avg_bs_usage = total.l_sum / frames;
  m.bs_usage_se = sample_se(total.l_sum, total.l_sumsq, frames);
  if (opts.compute_area) {
    m.avg_area = total.a_sum / frames;
    m.area_se = sample_se(total.a_sum, total.a_sumsq, frames);
  }
  m.per_user_mean_exp.resize(n_users);
  m.per_user_slack.resize(n_users);
  m.per_user_mean_rate.resize(n_users);
  for (int n = 0; n < n_users; ++n) {
    m.per_user_mean_exp[n] = total.exp_sum[n] / frames;
    m.per_user_slack[n] =
        m.per_user_mean_exp[n] - std::exp(-stats.theta[n] * stats.cbar[n]);
    m.per_user_mean_rate[n] = total.rate_sum[n] / frames;
  }
  return m;
}

PointResult run_point(const Scenario& s, Scheme scheme, const AscentConfig& cfg,
                      std::uint64_t seed, int eval_frames,
                      const SimOptions& opts) {
  const ScenarioStats stats = compute_scenario_stats(s, cfg.cmax_frames);
  PointResult out;
  out.policy = train_dual(s, stats, scheme, cfg, mix_seed(seed, 1));
  out.metrics = run_simulation(s, stats, out.policy, eval_frames, mix_seed(seed, 2),
                               opts);
  return out;
}

Scenario apply_sweep_value(const Scenario& base, const std::string& param,
                           double value) {
  Scenario s = base;
  if (param == "load") {
    for (QoSSpec& q : s.qos) q.arrival_rate_bps = value;
  } else if (param == "kappa") {
    s.power_slope = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + param +
                                "' (expected 'load' or 'kappa')");
  }
  s.finalize();
  return s;
}

std::vector<SweepRow> sweep(const Scenario& base, const std::vector<Scheme>& schemes,
                            const std::string& param,
                            const std::vector<double>& values,
                            const AscentConfig& cfg, std::uint64_t seed,
                            int eval_frames, const SimOptions& opts) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    const Scenario point = apply_sweep_value(base, param, v);
    for (Scheme scheme : schemes) {
      SweepRow row;
      row.scheme = scheme;
      row.param = param;
      row.value = v;
      // Common random numbers across schemes and grid values: the seeds
      // depend only on the run seed.
      PointResult pr = run_point(point, scheme, cfg, seed, eval_frames, opts);
      row.policy = std::move(pr.policy);
      row.metrics = std::move(pr.metrics);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, int n_users) {
  std::ostringstream out;
  out.precision(10);
  out << "scheme,swept_param,value,L_bar,L_bar_se,area,area_se";
  for (int n = 1; n <= n_users; ++n) out << ",slack_" << n;
  out << ",feasible\n";
  for (const SweepRow& r : rows) {
    out << scheme_name(r.scheme) << "," << r.param << "," << r.value << ","
        << r.metrics.avg_bs_usage << "," << r.metrics.bs_usage_se << ","
        << r.metrics.avg_area << "," << r.metrics.area_se;
    for (int n = 0; n < n_users; ++n) {
      out << ",";
      if (n < static_cast<int>(r.metrics.per_user_slack.size()))
        out << r.metrics.per_user_slack[n];
    }
    out << "," << (r.policy.feasible() ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace dmimo
