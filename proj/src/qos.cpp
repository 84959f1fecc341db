#include "dmimo/qos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmimo {

namespace {

// log of mean exp(-theta R), shifted so the largest term is exp(0).
double log_mean_exp_neg(std::span<const double> rates, double theta) {
  if (rates.empty())
    throw std::domain_error("effective_capacity: empty sample set");
  double m = theta * rates[0];
  for (double r : rates) m = std::min(m, theta * r);
  double acc = 0.0;
  for (double r : rates) acc += std::exp(m - theta * r);
  return -m + std::log(acc / static_cast<double>(rates.size()));
}

}  // namespace

double effective_capacity(std::span<const double> rate_samples, double theta) {
  if (!(theta > 0.0))
    throw std::domain_error("effective_capacity: theta must be positive");
  return -log_mean_exp_neg(rate_samples, theta) / theta;
}

double mean_exp_neg(std::span<const double> rate_samples, double theta) {
  if (rate_samples.empty())
    throw std::domain_error("mean_exp_neg: empty sample set");
  double acc = 0.0;
  for (double r : rate_samples) acc += std::exp(-theta * r);
  return acc / static_cast<double>(rate_samples.size());
}

double qos_slack(std::span<const double> rate_samples, double theta, double cbar) {
  return mean_exp_neg(rate_samples, theta) - std::exp(-theta * cbar);
}

double delay_violation_estimate(double theta, double cbar_nats, double delay_frames) {
  return std::exp(-theta * cbar_nats * delay_frames);
}

}  // namespace dmimo
