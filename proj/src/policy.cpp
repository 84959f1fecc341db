#include "dmimo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dmimo/bdpt.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/tdma.hpp"

namespace dmimo {

using nlohmann::json;

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::BdPt: return "bdpt";
    case Scheme::Tdma: return "tdma";
    case Scheme::PtOnly: return "ptonly";
  }
  return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "bdpt") return Scheme::BdPt;
  if (name == "tdma") return Scheme::Tdma;
  if (name == "ptonly") return Scheme::PtOnly;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

namespace {

std::string status_name(TrainStatus s) {
  switch (s) {
    case TrainStatus::Converged: return "converged";
    case TrainStatus::Infeasible: return "infeasible";
    case TrainStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

TrainStatus status_from_name(const std::string& s) {
  if (s == "converged") return TrainStatus::Converged;
  if (s == "infeasible") return TrainStatus::Infeasible;
  if (s == "iteration_limit") return TrainStatus::IterationLimit;
  throw std::invalid_argument("unknown train status '" + s + "'");
}

}  // namespace

void save_policy(const std::string& path, const DualState& policy) {
  json j;
  j["scheme"] = scheme_name(policy.scheme);
  j["lambda"] = policy.lambda;
  j["status"] = status_name(policy.status);
  j["iterations"] = policy.iterations;
  j["max_binding_slack"] = policy.max_binding_slack;
  j["final_slack"] = policy.final_slack;
  j["scenario_hash"] = policy.scenario_hash;
  j["train_seed"] = policy.train_seed;
  j["training_frames"] = policy.training_frames;
  if (!policy.notes.empty()) j["notes"] = policy.notes;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file '" + path + "'");
  out << j.dump(2) << "\n";
}

DualState load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read policy file '" + path + "'");
  json j = json::parse(in);
  DualState p;
  p.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  p.lambda = j.at("lambda").get<std::vector<double>>();
  p.status = status_from_name(j.at("status").get<std::string>());
  p.iterations = j.value("iterations", 0);
  p.max_binding_slack = j.value("max_binding_slack", 0.0);
  p.final_slack = j.value("final_slack", std::vector<double>{});
  p.scenario_hash = j.value("scenario_hash", std::string{});
  p.train_seed = j.value("train_seed", std::uint64_t{0});
  p.training_frames = j.value("training_frames", 0);
  p.notes = j.value("notes", std::string{});
  return p;
}

FrameData frame_data_from_candidates(const std::vector<CandidateMode>& candidates,
                                     const Scenario& s) {
  const int n_bs = s.num_bs();
  const int n_users = s.num_users();
  FrameData fd;
  fd.multi.assign(n_bs, std::vector<UserSplitData>(n_users));
  fd.single_rate.assign(n_bs, std::vector<double>(n_users, 0.0));

  for (int L = 1; L <= n_bs; ++L) {
    const CandidateMode& c = candidates[L];
    for (std::size_t u = 0; u < c.mode.active_users.size(); ++u)
      fd.multi[L - 1][c.mode.active_users[u]] = make_split_data(c.bases[u].snrs);
  }
  for (int n = 0; n < n_users; ++n)
    for (int L = 1; L <= n_bs; ++L)
      fd.single_rate[L - 1][n] =
          candidates[single_user_slot(n_bs, n, L)].single_user_rate;
  return fd;
}

void fill_tdma_rates(FrameData& fd, const ChannelState& state, const Scenario& s,
                     const PriorityOrder& priority) {
  const int n_bs = s.num_bs();
  const int n_users = s.num_users();
  const double bt = s.bt_product();
  const RMatrix gamma = aggregate_gain_matrix(s, state);
  const std::vector<int> seq = priority_bs_sequence(gamma, priority);

  fd.tdma_rate.assign(n_bs, std::vector<double>(n_users, 0.0));
  for (int L = 1; L <= n_bs; ++L) {
    const std::vector<int> omega(seq.begin(), seq.begin() + L);
    const double p = total_power(s, L);
    for (int n = 0; n < n_users; ++n)
      fd.tdma_rate[L - 1][n] = mimo_capacity(stacked_channel(state, omega, n), p, bt);
  }
}

namespace {

constexpr std::uint64_t kTieSalt = 0x7169u;

struct TrainingSet {
  std::vector<FrameData> frames;
  std::vector<std::vector<std::vector<double>>> single_exp;  // [frame][L-1][n]
};

TrainingSet build_training_set(const Scenario& s, const ScenarioStats& stats,
                               Scheme scheme, int n_frames, std::uint64_t seed) {
  TrainingSet ts;
  ts.frames.reserve(n_frames);
  const int n_bs = s.num_bs();
  const int n_users = s.num_users();
  for (int k = 0; k < n_frames; ++k) {
    ChannelState state = sample_channel(s, seed, static_cast<std::uint64_t>(k));
    FrameData fd;
    if (scheme == Scheme::Tdma) {
      fill_tdma_rates(fd, state, s, stats.priority);
    } else {
      auto candidates = enumerate_candidates(state, s, stats.priority);
      fd = frame_data_from_candidates(candidates, s);
      if (scheme == Scheme::PtOnly) fd.multi.clear();
    }
    fd.frame_index = static_cast<std::uint64_t>(k);
    if (scheme != Scheme::Tdma) {
      std::vector<std::vector<double>> ex(n_bs, std::vector<double>(n_users));
      for (int L = 1; L <= n_bs; ++L)
        for (int n = 0; n < n_users; ++n)
          ex[L - 1][n] = std::exp(-stats.theta[n] * fd.single_rate[L - 1][n]);
      ts.single_exp.push_back(std::move(ex));
    }
    ts.frames.push_back(std::move(fd));
  }
  return ts;
}

}  // namespace

DualState train_dual(const Scenario& s, const ScenarioStats& stats, Scheme scheme,
                     const AscentConfig& cfg, std::uint64_t seed,
                     std::vector<std::string>* convergence_log) {
  const int n_users = s.num_users();
  const int n_bs = s.num_bs();

  DualState out;
  out.scheme = scheme;
  out.lambda.assign(n_users, 0.0);
  out.scenario_hash = scenario_hash(s);
  out.train_seed = seed;
  out.training_frames = cfg.training_frames;
  if (scheme == Scheme::PtOnly)
    out.notes = "ptonly reconstructed as the BD-PT problem restricted to "
                "single-user modes plus silence";

  std::vector<double> exp_cbar(n_users);
  for (int n = 0; n < n_users; ++n)
    exp_cbar[n] = std::exp(-stats.theta[n] * stats.cbar[n]);

  // A load above the maximum achievable effective capacity can never be
  // carried: the per-user service rate is bounded by the full-set rate.
  for (int n = 0; n < n_users; ++n) {
    if (stats.cbar[n] > stats.cmax[n]) {
      out.status = TrainStatus::Infeasible;
      out.notes += (out.notes.empty() ? "" : "; ");
      out.notes += "load exceeds C_max for user " + std::to_string(n);
      out.final_slack.assign(n_users, 1.0);
      out.max_binding_slack = 1.0;
      return out;
    }
  }

  TrainingSet ts = build_training_set(s, stats, scheme, cfg.training_frames, seed);
  const int n_frames = static_cast<int>(ts.frames.size());

  std::vector<double> power_budget(n_bs);
  for (int L = 1; L <= n_bs; ++L) power_budget[L - 1] = total_power(s, L);
  const double bt = s.bt_product();

  std::vector<std::mt19937_64> tie_rngs;
  tie_rngs.reserve(n_frames);
  for (int k = 0; k < n_frames; ++k)
    tie_rngs.push_back(frame_rng(seed, static_cast<std::uint64_t>(k), kTieSalt));

  // Warm starts for the per-(frame, L) power-budget multiplier.
  std::vector<std::vector<double>> zeta_warm;
  if (scheme == Scheme::BdPt)
    zeta_warm.assign(n_frames, std::vector<double>(n_bs, 0.0));

  std::vector<double> slack(n_users, 0.0);
  TrainStatus status = TrainStatus::IterationLimit;
  int iter = 0;
  for (iter = 1; iter <= cfg.max_iterations; ++iter) {
    std::vector<double> mean_exp(n_users, 0.0);
    for (int k = 0; k < n_frames; ++k) {
      const FrameData& fd = ts.frames[k];
      if (scheme == Scheme::Tdma) {
        TdmaChoice ch = tdma_choose(fd, out.lambda, stats.theta, tie_rngs[k]);
        for (int n = 0; n < n_users; ++n)
          mean_exp[n] += std::exp(-stats.theta[n] * ch.user_rates[n]);
      } else if (scheme == Scheme::BdPt) {
        InnerChoice ch = bdpt_choose(fd, out.lambda, stats.theta, power_budget, bt,
                                     tie_rngs[k], &zeta_warm[k]);
        if (ch.chosen == 0) {
          for (int n = 0; n < n_users; ++n) mean_exp[n] += 1.0;
        } else if (ch.chosen <= n_bs) {
          for (int n = 0; n < n_users; ++n)
            mean_exp[n] += std::exp(-stats.theta[n] * ch.user_rates[n]);
        } else {
          const int idx = ch.chosen - 1 - n_bs;
          const int user = idx / n_bs;
          const int L = idx % n_bs + 1;
          for (int n = 0; n < n_users; ++n)
            mean_exp[n] += (n == user) ? ts.single_exp[k][L - 1][n] : 1.0;
        }
      } else {
        InnerChoice ch = ptonly_choose(fd, out.lambda, stats.theta, tie_rngs[k]);
        if (ch.chosen == 0) {
          for (int n = 0; n < n_users; ++n) mean_exp[n] += 1.0;
        } else {
          const int idx = ch.chosen - 1 - n_bs;
          const int user = idx / n_bs;
          const int L = idx % n_bs + 1;
          for (int n = 0; n < n_users; ++n)
            mean_exp[n] += (n == user) ? ts.single_exp[k][L - 1][n] : 1.0;
        }
      }
    }

    double max_binding = 0.0;
    bool converged = true;
    for (int n = 0; n < n_users; ++n) {
      slack[n] = mean_exp[n] / n_frames - exp_cbar[n];
      if (out.lambda[n] > 0.0) {
        max_binding = std::max(max_binding, std::abs(slack[n]));
        if (std::abs(slack[n]) > cfg.tolerance) converged = false;
      } else {
        max_binding = std::max(max_binding, std::max(slack[n], 0.0));
        if (slack[n] > cfg.tolerance) converged = false;
      }
    }

    if (convergence_log && (iter % 25 == 1 || converged)) {
      std::ostringstream line;
      line << iter << "," << max_binding;
      for (double l : out.lambda) line << "," << l;
      convergence_log->push_back(line.str());
    }
    out.max_binding_slack = max_binding;

    if (converged) {
      status = TrainStatus::Converged;
      break;
    }

    const double step = cfg.step0 / std::sqrt(static_cast<double>(iter));
    double lambda_max = 0.0;
    for (int n = 0; n < n_users; ++n) {
      out.lambda[n] = std::max(0.0, out.lambda[n] + step * slack[n]);
      lambda_max = std::max(lambda_max, out.lambda[n]);
    }
    if (lambda_max > cfg.lambda_cap) {
      status = TrainStatus::Infeasible;
      break;
    }
  }

  if (status == TrainStatus::IterationLimit) {
    // Hit the cap: a clearly unsatisfied binding constraint with large and
    // still-growing multipliers is the divergence signature from the dual
    // ascent; report it as infeasibility rather than a borderline stop.
    double lambda_max = 0.0;
    for (double l : out.lambda) lambda_max = std::max(lambda_max, l);
    double worst = 0.0;
    for (int n = 0; n < n_users; ++n) worst = std::max(worst, slack[n]);
    if (worst > 10.0 * cfg.tolerance && lambda_max > cfg.lambda_soft)
      status = TrainStatus::Infeasible;
  }

  out.status = status;
  out.iterations = std::min(iter, cfg.max_iterations);
  out.final_slack = slack;
  return out;
}

}  // namespace dmimo
