#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dmimo/bdpt.hpp"
#include "dmimo/policy.hpp"

using namespace dmimo;

namespace {

std::vector<double> random_snrs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> eps(n);
  for (double& e : eps) e = std::pow(10.0, u(rng));
  std::sort(eps.begin(), eps.end(), std::greater<>());
  return eps;
}

double split_objective(const std::vector<UserSplitData>& users,
                       const std::vector<double>& lambda,
                       const std::vector<double>& theta,
                       const std::vector<double>& powers, double bt) {
  double obj = 0.0;
  for (std::size_t n = 0; n < users.size(); ++n)
    obj += lambda[n] * std::exp(-theta[n] * split_rate(users[n], powers[n], bt));
  return obj;
}

// 1-D golden-section search over the first user's power share.
double golden_oracle(const std::vector<UserSplitData>& users,
                     const std::vector<double>& lambda,
                     const std::vector<double>& theta, double total, double bt) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = total;
  auto eval = [&](double p1) {
    return split_objective(users, lambda, theta, {p1, total - p1}, bt);
  };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = eval(c), fd = eval(d);
  for (int k = 0; k < 200; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = eval(d);
    }
  }
  return std::min({fc, fd, eval(a), eval(b), eval(0.5 * (a + b))});
}

FrameData make_frame(int n_bs, int n_users) {
  FrameData fd;
  fd.multi.assign(n_bs, std::vector<UserSplitData>(n_users));
  fd.single_rate.assign(n_bs, std::vector<double>(n_users, 0.0));
  return fd;
}

}  // namespace

TEST_CASE("single funded user gets full water-filling") {
  std::mt19937_64 rng(1);
  const std::vector<double> eps = random_snrs(rng, 3);
  const std::vector<UserSplitData> users = {make_split_data(eps)};
  const double bt = 1000.0;
  const SplitResult r =
      optimal_power_split(users, {2.0}, {1e-3}, 4.0, bt);
  CHECK(r.funded == 1);
  CHECK(r.power[0] == doctest::Approx(4.0));
  CHECK(r.rate[0] == doctest::Approx(split_rate(users[0], 4.0, bt)));
}

TEST_CASE("symmetric users split the budget equally") {
  std::mt19937_64 rng(2);
  const std::vector<double> eps = random_snrs(rng, 2);
  const std::vector<UserSplitData> users = {make_split_data(eps),
                                            make_split_data(eps)};
  const SplitResult r = optimal_power_split(users, {1.5, 1.5}, {2e-3, 2e-3},
                                            3.0, 1000.0);
  CHECK(r.funded == 2);
  CHECK(r.power[0] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(r.power[1] == doctest::Approx(1.5).epsilon(1e-7));
}

TEST_CASE("zero-multiplier users receive no power") {
  std::mt19937_64 rng(3);
  const std::vector<UserSplitData> users = {make_split_data(random_snrs(rng, 2)),
                                            make_split_data(random_snrs(rng, 2))};
  const SplitResult r = optimal_power_split(users, {0.0, 1.0}, {1e-3, 1e-3},
                                            2.0, 1000.0);
  CHECK(r.power[0] == 0.0);
  CHECK(r.power[1] == doctest::Approx(2.0));
}

TEST_CASE("two-user split matches the golden-section oracle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lu(0.1, 5.0);
  std::uniform_real_distribution<double> tu(5e-4, 5e-3);
  std::uniform_real_distribution<double> pu(0.5, 6.0);
  const double bt = 1000.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<UserSplitData> users = {
        make_split_data(random_snrs(rng, 1 + trial % 3)),
        make_split_data(random_snrs(rng, 1 + (trial / 3) % 3))};
    const std::vector<double> lambda = {lu(rng), lu(rng)};
    const std::vector<double> theta = {tu(rng), tu(rng)};
    const double total = pu(rng);

    const SplitResult r = optimal_power_split(users, lambda, theta, total, bt);
    const double mine = split_objective(users, lambda, theta,
                                        {r.power[0], r.power[1]}, bt);
    const double oracle = golden_oracle(users, lambda, theta, total, bt);
    CHECK(mine <= oracle + 1e-4 * std::max(1.0, std::abs(oracle)));

    // Budget is fully spent whenever anyone is funded.
    if (r.funded > 0)
      CHECK(r.power[0] + r.power[1] == doctest::Approx(total).epsilon(1e-7));

    // Stationarity: the common multiplier prices every funded user's
    // marginal objective: zeta * mu = BT lambda theta e^{-theta R}.
    if (r.funded >= 2) {
      for (int n = 0; n < 2; ++n) {
        if (r.power[n] <= 0.0) continue;
        const double lhs = r.zeta * r.mu[n];
        const double rhs =
            bt * lambda[n] * theta[n] * std::exp(-theta[n] * r.rate[n]);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("silence is chosen when all multipliers vanish") {
  FrameData fd = make_frame(3, 2);
  fd.single_rate = {{5.0, 4.0}, {6.0, 5.0}, {7.0, 6.0}};
  std::mt19937_64 rng(5);
  const InnerChoice c = bdpt_choose(fd, {0.0, 0.0}, {1e-3, 1e-3},
                                    {1.0, 2.0, 3.0}, 1000.0, rng);
  CHECK(c.chosen == 0);
  CHECK(c.L == 0);
  CHECK(c.scores[0] == doctest::Approx(0.0));
}

TEST_CASE("chosen slot attains the exhaustive score minimum") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lu(0.0, 30.0);
  std::uniform_real_distribution<double> ru(0.0, 3000.0);
  const int n_bs = 3, n_users = 2;
  const double bt = 1000.0;
  const std::vector<double> budgets = {1.0, 2.0, 3.0};
  for (int trial = 0; trial < 500; ++trial) {
    FrameData fd = make_frame(n_bs, n_users);
    for (int L = 1; L <= n_bs; ++L)
      for (int n = 0; n < n_users; ++n) {
        fd.single_rate[L - 1][n] = ru(rng);
        if ((trial + L + n) % 3) fd.multi[L - 1][n] = make_split_data(
            random_snrs(rng, 2));
      }
    const std::vector<double> lambda = {lu(rng), lu(rng)};
    const std::vector<double> theta = {1e-3, 2e-3};
    const InnerChoice c = bdpt_choose(fd, lambda, theta, budgets, bt, rng);

    double best = c.scores[0];
    for (double sc : c.scores) best = std::min(best, sc);
    CHECK(c.scores[c.chosen] == doctest::Approx(best));

    // Recompute every slot score independently.
    const double lam_sum = lambda[0] + lambda[1];
    CHECK(c.scores[0] == doctest::Approx(lam_sum));
    for (int L = 1; L <= n_bs; ++L) {
      const SplitResult& sp = c.splits[L - 1];
      double psi = L;
      for (int n = 0; n < n_users; ++n)
        psi += lambda[n] * std::exp(-theta[n] * sp.rate[n]);
      CHECK(c.scores[L] == doctest::Approx(psi).epsilon(1e-9));
      for (int n = 0; n < n_users; ++n) {
        const int slot = single_user_slot(n_bs, n, L);
        const double psi_single =
            L + lambda[n] * std::exp(-theta[n] * fd.single_rate[L - 1][n]) +
            lam_sum - lambda[n];
        CHECK(c.scores[slot] == doctest::Approx(psi_single).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("exact score ties split probability equally") {
  const int n_bs = 2, n_users = 2;
  FrameData fd = make_frame(n_bs, n_users);
  // Both users see the same rate at L = 1; identical lambda and theta make
  // the two single-user slots score bit-identically.
  fd.single_rate = {{1000.0, 1000.0}, {0.0, 0.0}};
  const std::vector<double> lambda = {40.0, 40.0};
  const std::vector<double> theta = {1e-3, 1e-3};

  std::mt19937_64 rng(7);
  int picks[2] = {0, 0};
  const int trials = 4000;
  const int slot_a = single_user_slot(n_bs, 0, 1);
  const int slot_b = single_user_slot(n_bs, 1, 1);
  for (int k = 0; k < trials; ++k) {
    const InnerChoice c = bdpt_choose(fd, lambda, theta, {1.0, 2.0}, 1000.0, rng);
    CHECK(c.probabilities[slot_a] == doctest::Approx(0.5));
    CHECK(c.probabilities[slot_b] == doctest::Approx(0.5));
    if (c.chosen == slot_a) ++picks[0];
    if (c.chosen == slot_b) ++picks[1];
  }
  CHECK(picks[0] + picks[1] == trials);
  CHECK(std::abs(picks[0] - trials / 2) < 150);
}

TEST_CASE("pt-only ignores multi-user slots and matches exhaustive argmin") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lu(0.0, 30.0);
  std::uniform_real_distribution<double> ru(0.0, 3000.0);
  const int n_bs = 3, n_users = 2;
  for (int trial = 0; trial < 500; ++trial) {
    FrameData fd = make_frame(n_bs, n_users);
    for (int L = 1; L <= n_bs; ++L)
      for (int n = 0; n < n_users; ++n) fd.single_rate[L - 1][n] = ru(rng);
    const std::vector<double> lambda = {lu(rng), lu(rng)};
    const std::vector<double> theta = {1e-3, 2e-3};
    const InnerChoice c = ptonly_choose(fd, lambda, theta, rng);

    CHECK((c.chosen == 0 || c.chosen > n_bs));
    double best = c.scores[0];
    for (double sc : c.scores) best = std::min(best, sc);
    CHECK(c.scores[c.chosen] == doctest::Approx(best));
    for (int L = 1; L <= n_bs; ++L)
      CHECK(std::isinf(c.scores[L]));
  }
}

TEST_CASE("pt-only with zero multipliers stays silent") {
  FrameData fd = make_frame(2, 1);
  fd.single_rate = {{100.0}, {200.0}};
  std::mt19937_64 rng(9);
  const InnerChoice c = ptonly_choose(fd, {0.0}, {1e-3}, rng);
  CHECK(c.chosen == 0);
}
