#include "dmimo/tdma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmimo {

TimeShareResult time_shares(const std::vector<double>& rates,
                            const std::vector<double>& lambda,
                            const std::vector<double>& theta) {
  const int n_users = static_cast<int>(rates.size());
  TimeShareResult out;
  out.t.assign(n_users, 0.0);

  // a_n = lambda_n theta_n R_n; users with a_n = 0 never get a slot.
  std::vector<double> ln_a(n_users, 0.0);
  double a_max = 0.0;
  for (int n = 0; n < n_users; ++n) {
    const double a = lambda[n] * theta[n] * rates[n];
    if (a > a_max) a_max = a;
    ln_a[n] = (a > 0.0) ? std::log(a) : -std::numeric_limits<double>::infinity();
  }
  if (a_max <= 0.0) {
    out.degenerate = true;
    out.t.assign(n_users, 1.0 / n_users);
    return out;
  }

  auto sum_at = [&](double ln_delta) {
    double s = 0.0;
    for (int n = 0; n < n_users; ++n) {
      if (!std::isfinite(ln_a[n])) continue;
      const double t = (ln_a[n] - ln_delta) / (theta[n] * rates[n]);
      if (t > 0.0) s += t;
    }
    return s;
  };

  // Sum of shares is strictly decreasing in delta wherever positive; the
  // upper end makes every share 0, extend the lower end until it overshoots.
  double hi = std::log(a_max);
  double lo = hi - 40.0;
  while (sum_at(lo) < 1.0 && lo > hi - 4000.0) lo -= 40.0;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = sum_at(mid);
    if (std::abs(s - 1.0) <= 1e-9) {
      lo = hi = mid;
      break;
    }
    if (s > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double ln_delta = 0.5 * (lo + hi);
  out.delta = std::exp(ln_delta);
  for (int n = 0; n < n_users; ++n) {
    if (!std::isfinite(ln_a[n])) continue;
    out.t[n] = std::max(0.0, (ln_a[n] - ln_delta) / (theta[n] * rates[n]));
  }
  return out;
}

TdmaChoice tdma_choose(const FrameData& fd, const std::vector<double>& lambda,
                       const std::vector<double>& theta,
                       std::mt19937_64& tie_rng) {
  const int n_bs = static_cast<int>(fd.tdma_rate.size());
  const int n_users = static_cast<int>(lambda.size());

  double lambda_sum = 0.0;
  for (double l : lambda) lambda_sum += l;

  TdmaChoice out;
  out.scores.assign(n_bs + 1, 0.0);
  out.scores[0] = lambda_sum;
  out.shares.resize(n_bs);
  for (int L = 1; L <= n_bs; ++L) {
    out.shares[L - 1] = time_shares(fd.tdma_rate[L - 1], lambda, theta);
    double score = L;
    for (int n = 0; n < n_users; ++n)
      score += lambda[n] * std::exp(-theta[n] * out.shares[L - 1].t[n] *
                                    fd.tdma_rate[L - 1][n]);
    out.scores[L] = score;
  }

  double best = out.scores[0];
  for (double s : out.scores) best = std::min(best, s);
  std::vector<int> tied;
  for (int L = 0; L <= n_bs; ++L)
    if (out.scores[L] == best) tied.push_back(L);
  out.probabilities.assign(n_bs + 1, 0.0);
  for (int L : tied) out.probabilities[L] = 1.0 / static_cast<double>(tied.size());
  if (tied.size() == 1) {
    out.L = tied[0];
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
    out.L = tied[pick(tie_rng)];
  }

  out.user_rates.assign(n_users, 0.0);
  if (out.L >= 1)
    for (int n = 0; n < n_users; ++n)
      out.user_rates[n] = out.shares[out.L - 1].t[n] * fd.tdma_rate[out.L - 1][n];
  return out;
}

}  // namespace dmimo
