#include "dmimo/bdpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Water level, active count and power for one funded user at ln(zeta) = x.
struct UserLevel {
  double mu = 0.0;
  double power = 0.0;
  double d_power_dx = 0.0;  // derivative w.r.t. ln zeta
  int istar = 0;
};

UserLevel user_level_at(const UserSplitData& u, double x, double ln_bt_theta_lambda,
                        double theta_bt) {
  UserLevel out;
  // Unfunded once zeta >= BT lambda theta eps_1.
  if (x >= ln_bt_theta_lambda + std::log(u.eps1)) return out;
  for (int i = 1; i <= u.z; ++i) {
    const double denom = 1.0 + i * theta_bt;
    const double ln_mu = -(x - ln_bt_theta_lambda) / denom -
                         theta_bt / denom * u.ln_eps_prefix[i - 1];
    const double mu = std::exp(ln_mu);
    const bool lower_ok = mu >= u.inv_eps[i - 1];
    const bool upper_ok = (i == u.z) || (mu < u.inv_eps[i]);
    if (lower_ok && upper_ok) {
      out.mu = mu;
      out.istar = i;
      out.power = i * mu - u.inv_eps_prefix[i - 1];
      out.d_power_dx = -i * mu / denom;
      return out;
    }
  }
  // Numerical boundary: fall back to the deepest bin whose lower edge holds.
  for (int i = u.z; i >= 1; --i) {
    const double denom = 1.0 + i * theta_bt;
    const double ln_mu = -(x - ln_bt_theta_lambda) / denom -
                         theta_bt / denom * u.ln_eps_prefix[i - 1];
    const double mu = std::exp(ln_mu);
    if (mu >= u.inv_eps[i - 1]) {
      out.mu = mu;
      out.istar = i;
      out.power = i * mu - u.inv_eps_prefix[i - 1];
      out.d_power_dx = -i * mu / denom;
      return out;
    }
  }
  return out;
}

// Exact water-filling of `power` onto one user via the prefix arrays.
UserLevel waterfill_prefix(const UserSplitData& u, double power) {
  UserLevel out;
  if (power <= 0.0) {
    out.mu = u.inv_eps[0];
    return out;
  }
  for (int i = 1; i <= u.z; ++i) {
    const double mu = (power + u.inv_eps_prefix[i - 1]) / i;
    if (i == u.z || mu < u.inv_eps[i]) {
      out.mu = mu;
      out.istar = i;
      out.power = power;
      return out;
    }
  }
  return out;
}

double level_rate(const UserSplitData& u, const UserLevel& lv, double bt) {
  if (lv.istar == 0) return 0.0;
  return bt * (u.ln_eps_prefix[lv.istar - 1] + lv.istar * std::log(lv.mu));
}

}  // namespace

UserSplitData make_split_data(const std::vector<double>& snrs) {
  UserSplitData out;
  out.z = static_cast<int>(snrs.size());
  if (out.z == 0) return out;
  out.eps1 = snrs[0];
  out.inv_eps.resize(out.z);
  out.ln_eps_prefix.resize(out.z);
  out.inv_eps_prefix.resize(out.z);
  double ln_acc = 0.0;
  double inv_acc = 0.0;
  for (int i = 0; i < out.z; ++i) {
    out.inv_eps[i] = 1.0 / snrs[i];
    ln_acc += std::log(snrs[i]);
    inv_acc += out.inv_eps[i];
    out.ln_eps_prefix[i] = ln_acc;
    out.inv_eps_prefix[i] = inv_acc;
  }
  return out;
}

double split_rate(const UserSplitData& u, double power, double bt_product) {
  if (u.z == 0 || power <= 0.0) return 0.0;
  const UserLevel lv = waterfill_prefix(u, power);
  return level_rate(u, lv, bt_product);
}

SplitResult optimal_power_split(const std::vector<UserSplitData>& users,
                                const std::vector<double>& lambda,
                                const std::vector<double>& theta,
                                double total_power, double bt_product,
                                double zeta_hint) {
  const int n_users = static_cast<int>(users.size());
  SplitResult out;
  out.power.assign(n_users, 0.0);
  out.rate.assign(n_users, 0.0);
  out.mu.assign(n_users, 0.0);
  out.istar.assign(n_users, 0);

  std::vector<int> funded;
  for (int n = 0; n < n_users; ++n)
    if (users[n].z > 0 && lambda[n] > 0.0) funded.push_back(n);
  out.funded = static_cast<int>(funded.size());
  if (funded.empty() || total_power <= 0.0) return out;

  if (funded.size() == 1) {
    // One recipient: the split degenerates to plain water-filling of the
    // whole budget; any consistent zeta prices it (recorded for audits).
    const int n = funded[0];
    const UserLevel lv = waterfill_prefix(users[n], total_power);
    out.power[n] = lv.power;
    out.mu[n] = lv.mu;
    out.istar[n] = lv.istar;
    out.rate[n] = level_rate(users[n], lv, bt_product);
    if (lv.mu > 0.0)
      out.zeta = bt_product * lambda[n] * theta[n] *
                 std::exp(-theta[n] * out.rate[n]) / lv.mu;
    return out;
  }

  std::vector<double> ln_btl(n_users, 0.0);
  std::vector<double> theta_bt(n_users, 0.0);
  for (int n : funded) {
    ln_btl[n] = std::log(bt_product * theta[n] * lambda[n]);
    theta_bt[n] = theta[n] * bt_product;
  }

  auto total_at = [&](double x, double* deriv) {
    double p = 0.0;
    double d = 0.0;
    for (int n : funded) {
      const UserLevel lv = user_level_at(users[n], x, ln_btl[n], theta_bt[n]);
      p += lv.power;
      d += lv.d_power_dx;
    }
    if (deriv) *deriv = d;
    return p;
  };

  // Total power is strictly decreasing in ln zeta; bracket then run a
  // bisection-safeguarded Newton iteration.
  double lo = -40.0;
  double hi = 40.0;
  while (total_at(lo, nullptr) < total_power && lo > -680.0) lo -= 80.0;
  while (total_at(hi, nullptr) > total_power && hi < 680.0) hi += 80.0;

  double x = (zeta_hint > 0.0)
                 ? std::clamp(std::log(zeta_hint), lo, hi)
                 : 0.5 * (lo + hi);
  const double tol = 1e-9 * std::max(1.0, total_power);
  for (int it = 0; it < 200; ++it) {
    double deriv = 0.0;
    const double p = total_at(x, &deriv);
    const double resid = p - total_power;
    if (std::abs(resid) <= tol) break;
    if (resid > 0.0)
      lo = x;  // need larger zeta
    else
      hi = x;
    double next = (deriv < 0.0) ? x - resid / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-15 && std::abs(resid) > tol)
      next = 0.5 * (lo + hi);
    x = next;
  }

  out.zeta = std::exp(x);
  for (int n : funded) {
    const UserLevel lv = user_level_at(users[n], x, ln_btl[n], theta_bt[n]);
    out.power[n] = lv.power;
    out.mu[n] = lv.mu;
    out.istar[n] = lv.istar;
    out.rate[n] = level_rate(users[n], lv, bt_product);
  }
  return out;
}

namespace {

// Equal-probability choice among exactly tied minimum scores.
int choose_min_slot(const std::vector<double>& scores,
                    std::vector<double>& probabilities, std::mt19937_64& rng) {
  double best = kInf;
  for (double s : scores) best = std::min(best, s);
  std::vector<int> tied;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] == best) tied.push_back(static_cast<int>(i));
  probabilities.assign(scores.size(), 0.0);
  for (int i : tied) probabilities[i] = 1.0 / static_cast<double>(tied.size());
  if (tied.size() == 1) return tied[0];
  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
  return tied[pick(rng)];
}

}  // namespace

int single_user_slot(int n_bs, int user, int L) {
  return 1 + n_bs + user * n_bs + (L - 1);
}

InnerChoice bdpt_choose(const FrameData& fd, const std::vector<double>& lambda,
                        const std::vector<double>& theta,
                        const std::vector<double>& power_budget, double bt_product,
                        std::mt19937_64& tie_rng,
                        std::vector<double>* zeta_warm) {
  const int n_bs = static_cast<int>(fd.multi.size());
  const int n_users = static_cast<int>(lambda.size());
  const int n_slots = 1 + n_bs + n_bs * n_users;

  double lambda_sum = 0.0;
  for (double l : lambda) lambda_sum += l;

  InnerChoice out;
  out.scores.assign(n_slots, kInf);
  out.scores[0] = lambda_sum;  // silence: all rates zero
  out.splits.resize(n_bs);

  for (int L = 1; L <= n_bs; ++L) {
    const double hint =
        (zeta_warm && (*zeta_warm)[L - 1] > 0.0) ? (*zeta_warm)[L - 1] : 0.0;
    SplitResult split = optimal_power_split(fd.multi[L - 1], lambda, theta,
                                            power_budget[L - 1], bt_product, hint);
    if (zeta_warm && split.zeta > 0.0) (*zeta_warm)[L - 1] = split.zeta;
    double score = L;
    for (int n = 0; n < n_users; ++n)
      if (lambda[n] > 0.0)
        score += lambda[n] * std::exp(-theta[n] * split.rate[n]);
    out.scores[L] = score;
    out.splits[L - 1] = std::move(split);
  }

  for (int n = 0; n < n_users; ++n)
    for (int L = 1; L <= n_bs; ++L) {
      const double r = fd.single_rate[L - 1][n];
      out.scores[single_user_slot(n_bs, n, L)] =
          L + lambda[n] * std::exp(-theta[n] * r) + (lambda_sum - lambda[n]);
    }

  out.chosen = choose_min_slot(out.scores, out.probabilities, tie_rng);
  out.user_rates.assign(n_users, 0.0);
  if (out.chosen == 0) {
    out.L = 0;
  } else if (out.chosen <= n_bs) {
    out.L = out.chosen;
    out.user_rates = out.splits[out.L - 1].rate;
  } else {
    const int idx = out.chosen - 1 - n_bs;
    const int user = idx / n_bs;
    out.L = idx % n_bs + 1;
    out.user_rates[user] = fd.single_rate[out.L - 1][user];
  }
  return out;
}

InnerChoice ptonly_choose(const FrameData& fd, const std::vector<double>& lambda,
                          const std::vector<double>& theta,
                          std::mt19937_64& tie_rng) {
  const int n_bs = static_cast<int>(fd.single_rate.size());
  const int n_users = static_cast<int>(lambda.size());
  const int n_slots = 1 + n_bs + n_bs * n_users;

  double lambda_sum = 0.0;
  for (double l : lambda) lambda_sum += l;

  InnerChoice out;
  out.scores.assign(n_slots, kInf);  // multi-user slots stay excluded
  out.scores[0] = lambda_sum;
  for (int n = 0; n < n_users; ++n)
    for (int L = 1; L <= n_bs; ++L) {
      const double r = fd.single_rate[L - 1][n];
      out.scores[single_user_slot(n_bs, n, L)] =
          L + lambda[n] * std::exp(-theta[n] * r) + (lambda_sum - lambda[n]);
    }

  out.chosen = choose_min_slot(out.scores, out.probabilities, tie_rng);
  out.user_rates.assign(n_users, 0.0);
  if (out.chosen == 0) {
    out.L = 0;
  } else {
    const int idx = out.chosen - 1 - n_bs;
    const int user = idx / n_bs;
    out.L = idx % n_bs + 1;
    out.user_rates[user] = fd.single_rate[out.L - 1][user];
  }
  return out;
}

}  // namespace dmimo
