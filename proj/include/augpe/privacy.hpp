#pragma once

#include <cstdint>

#include "augpe/core.hpp"

namespace augpe::privacy {

/// Bundle tying the accountant to the engine: the run is (epsilon, delta)-DP
/// after `iterations` rounds of Gaussian noise with multiplier `sigma` on a
/// sensitivity-`sensitivity` histogram.
struct PrivacySpec {
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint32_t iterations = 1;
  double sensitivity = 1.0;
  double sigma = 0.0;
};

/// Smallest delta such that one Gaussian mechanism with noise `sigma` on a
/// statistic of L2 sensitivity `sensitivity` is (epsilon, delta)-DP:
///
///   delta = Phi(D/(2s) - eps*s/D) - e^eps * Phi(-D/(2s) - eps*s/D)
///
/// The standard normal CDF is evaluated through erfc, and the e^eps * Phi(-x)
/// product is computed in log space so the expression stays finite for large
/// epsilon. Result clamped to [0, 1]. Throws DomainError for sigma <= 0.
double gaussian_delta(double sigma, double epsilon, double sensitivity = 1.0);

/// Delta after `iterations` adaptive rounds with per-round noise `sigma` and
/// sensitivity 1: the composition is one Gaussian mechanism with noise
/// sigma/sqrt(T), i.e. Phi(sqrt(T)/(2s) - eps*s/sqrt(T)) - e^eps * Phi(...).
double composed_delta(double sigma, std::uint32_t iterations, double epsilon);

/// Smallest sigma (relative tolerance 1e-6) with
/// composed_delta(sigma, iterations, epsilon) <= delta. Bisection over a
/// bracket grown geometrically from [1e-3, 1e3]; delta is monotone
/// decreasing in sigma. Throws SolverError if bracketing fails.
double calibrate_sigma(double epsilon, double delta, std::uint32_t iterations);

/// Smallest epsilon >= 0 (absolute tolerance 1e-6) with
/// composed_delta(sigma, iterations, epsilon) <= delta. sigma = 0 returns
/// +infinity (the no-noise sentinel).
double epsilon_for(double sigma, double delta, std::uint32_t iterations);

/// Default privacy slack: 1/(n_priv * log(n_priv)). Natural log by default;
/// this is the base that reproduces the published noise multipliers.
/// Requires n_priv >= 2.
double default_delta(std::size_t n_priv, DeltaLogBase base = DeltaLogBase::kLn);

/// Resolves the run's noise multiplier from the config: sigma_override wins;
/// epsilon = inf means sigma = 0; otherwise sigma is calibrated against
/// delta (or the default delta for `n_priv` when the config says auto).
PrivacySpec resolve(const RunConfig& cfg, std::size_t n_priv);

/// ln(erfc(x)), stable for large positive x via the asymptotic expansion.
double log_erfc(double x);

}  // namespace augpe::privacy
