#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dmimo/tdma.hpp"

using namespace dmimo;

namespace {

double share_objective(const std::vector<double>& t,
                       const std::vector<double>& rates,
                       const std::vector<double>& lambda,
                       const std::vector<double>& theta) {
  double obj = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n)
    obj += lambda[n] * std::exp(-theta[n] * t[n] * rates[n]);
  return obj;
}

std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) tau = t;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

double oracle_objective(const std::vector<double>& rates,
                        const std::vector<double>& lambda,
                        const std::vector<double>& theta, int iters = 20000) {
  const std::size_t n = rates.size();
  std::vector<double> t(n, 1.0 / n);
  for (int k = 0; k < iters; ++k) {
    const double step = 0.5 / std::sqrt(k + 1.0);
    std::vector<double> g = t;
    for (std::size_t i = 0; i < n; ++i)
      g[i] = t[i] + step * lambda[i] * theta[i] * rates[i] *
                        std::exp(-theta[i] * t[i] * rates[i]);
    t = project_simplex(g);
  }
  return share_objective(t, rates, lambda, theta);
}

}  // namespace

TEST_CASE("identical users share time equally") {
  const TimeShareResult r = time_shares({1000.0, 1000.0}, {2.0, 2.0},
                                        {1e-3, 1e-3});
  CHECK(r.t[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.t[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("a zero multiplier forfeits its slot") {
  const TimeShareResult r = time_shares({1000.0, 800.0}, {0.0, 3.0},
                                        {1e-3, 1e-3});
  CHECK(r.t[0] == 0.0);
  CHECK(r.t[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate instance spreads time uniformly") {
  const TimeShareResult r = time_shares({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                                        {1e-3, 1e-3, 1e-3});
  CHECK(r.degenerate);
  CHECK(r.t[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("shares match the projected-gradient simplex oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ru(100.0, 4000.0);
  std::uniform_real_distribution<double> lu(0.1, 10.0);
  std::uniform_real_distribution<double> tu(5e-4, 5e-3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    std::vector<double> rates(n), lambda(n), theta(n);
    for (int i = 0; i < n; ++i) {
      rates[i] = ru(rng);
      lambda[i] = lu(rng);
      theta[i] = tu(rng);
    }
    const TimeShareResult r = time_shares(rates, lambda, theta);
    const double sum = std::accumulate(r.t.begin(), r.t.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    const double mine = share_objective(r.t, rates, lambda, theta);
    const double oracle = oracle_objective(rates, lambda, theta);
    CHECK(mine <= oracle + 1e-5 * std::max(1.0, oracle));
  }
}

TEST_CASE("zero multipliers choose silence") {
  FrameData fd;
  fd.tdma_rate = {{1000.0, 900.0}, {1500.0, 1200.0}};
  std::mt19937_64 rng(12);
  const TdmaChoice c = tdma_choose(fd, {0.0, 0.0}, {1e-3, 1e-3}, rng);
  CHECK(c.L == 0);
  CHECK(c.user_rates == std::vector<double>{0.0, 0.0});
}

TEST_CASE("chosen cardinality attains the exhaustive score minimum") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ru(0.0, 4000.0);
  std::uniform_real_distribution<double> lu(0.0, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    FrameData fd;
    const int n_bs = 4, n_users = 3;
    fd.tdma_rate.assign(n_bs, std::vector<double>(n_users));
    for (auto& row : fd.tdma_rate)
      for (double& v : row) v = ru(rng);
    std::vector<double> lambda(n_users), theta(n_users, 1e-3);
    for (double& l : lambda) l = lu(rng);

    const TdmaChoice c = tdma_choose(fd, lambda, theta, rng);
    double best = c.scores[0];
    for (double sc : c.scores) best = std::min(best, sc);
    CHECK(c.scores[c.L] == doctest::Approx(best));

    // Independent recomputation of every candidate score with its own
    // optimal shares.
    const double lam_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    CHECK(c.scores[0] == doctest::Approx(lam_sum));
    for (int L = 1; L <= n_bs; ++L) {
      const TimeShareResult sh = time_shares(fd.tdma_rate[L - 1], lambda, theta);
      const double psi =
          L + share_objective(sh.t, fd.tdma_rate[L - 1], lambda, theta);
      CHECK(c.scores[L] == doctest::Approx(psi).epsilon(1e-9));
    }

    // Rates returned are the time-shared rates at the chosen cardinality.
    if (c.L > 0) {
      for (int n = 0; n < n_users; ++n)
        CHECK(c.user_rates[n] ==
              doctest::Approx(c.shares[c.L - 1].t[n] * fd.tdma_rate[c.L - 1][n]));
    }
  }
}

TEST_CASE("tiny multipliers favor small cardinality") {
  FrameData fd;
  fd.tdma_rate = {{1000.0}, {2000.0}, {3000.0}};
  std::mt19937_64 rng(14);
  const TdmaChoice c = tdma_choose(fd, {1e-6}, {1e-3}, rng);
  CHECK(c.L == 0);  // the ell term dominates any service gain
}
