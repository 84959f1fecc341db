#pragma once

#include <span>
#include <vector>

namespace dmimo {

// Effective capacity -(1/theta) ln E{exp(-theta R)} over an uncorrelated
// service-rate sample set, computed with overflow-safe log-mean-exp.
// Rates and the result are in nats per frame.
double effective_capacity(std::span<const double> rate_samples, double theta);

// Mean exp(-theta R) with underflow guarded by shifting the exponent.
double mean_exp_neg(std::span<const double> rate_samples, double theta);

// E{exp(-theta R)} - exp(-theta cbar); the QoS constraint holds iff <= 0.
double qos_slack(std::span<const double> rate_samples, double theta, double cbar);

// exp(-theta cbar delay) diagnostic approximation of Pr{D > D_th}.
double delay_violation_estimate(double theta, double cbar_nats, double delay_frames);

}  // namespace dmimo
