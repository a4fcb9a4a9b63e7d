#include "augpe/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace augpe::privacy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLnSqrtPi = 0.5723649429247001;  // ln(sqrt(pi))

// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

}  // namespace

double log_erfc(double x) {
  if (x < 20.0) {
    const double v = std::erfc(x);
    if (v > 0.0) return std::log(v);
  }
  // erfc(x) ~ exp(-x^2) / (x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6))
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 + inv2 * (-0.5 + inv2 * (0.75 - 1.875 * inv2));
  return -x * x - std::log(x) - kLnSqrtPi + std::log(series);
}

// ln(Phi(x)); routed through log_erfc so deep lower tails stay finite.
static double log_norm_cdf(double x) {
  return std::log(0.5) + log_erfc(-x / kSqrt2);
}

double gaussian_delta(double sigma, double epsilon, double sensitivity) {
  if (!(sigma > 0.0)) throw DomainError("gaussian_delta: sigma must be > 0");
  if (!(sensitivity > 0.0)) throw DomainError("gaussian_delta: sensitivity must be > 0");
  if (epsilon < 0.0) throw DomainError("gaussian_delta: epsilon must be >= 0");
  if (std::isinf(epsilon)) return 0.0;

  const double a = sensitivity / (2.0 * sigma) - epsilon * sigma / sensitivity;
  const double b = -sensitivity / (2.0 * sigma) - epsilon * sigma / sensitivity;

  // epsilon + ln Phi(b): both factors of e^eps * Phi(b) can overflow or
  // underflow on their own; their product is always in [0, 1].
  const double log_second = epsilon + log_norm_cdf(b);
  const double second = log_second < -745.0 ? 0.0 : std::exp(log_second);
  const double delta = norm_cdf(a) - second;
  return std::clamp(delta, 0.0, 1.0);
}

double composed_delta(double sigma, std::uint32_t iterations, double epsilon) {
  if (iterations < 1) throw DomainError("composed_delta: iterations must be >= 1");
  return gaussian_delta(sigma / std::sqrt(static_cast<double>(iterations)), epsilon, 1.0);
}

double calibrate_sigma(double epsilon, double delta, std::uint32_t iterations) {
  if (!(epsilon > 0.0) || std::isinf(epsilon))
    throw DomainError("calibrate_sigma: epsilon must be finite and > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("calibrate_sigma: delta must be in (0,1)");
  if (iterations < 1) throw DomainError("calibrate_sigma: iterations must be >= 1");

  double lo = 1e-3;
  double hi = 1e3;
  int growth = 0;
  while (composed_delta(hi, iterations, epsilon) > delta) {
    hi *= 2.0;
    if (++growth > 200) throw SolverError("calibrate_sigma: failed to bracket from above");
  }
  growth = 0;
  while (composed_delta(lo, iterations, epsilon) <= delta) {
    lo /= 2.0;
    if (++growth > 200) throw SolverError("calibrate_sigma: failed to bracket from below");
  }
  // Invariant: delta(lo) > target >= delta(hi). Bisect to 1e-6 relative.
  while ((hi - lo) > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (composed_delta(mid, iterations, epsilon) <= delta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double epsilon_for(double sigma, double delta, std::uint32_t iterations) {
  if (sigma < 0.0) throw DomainError("epsilon_for: sigma must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("epsilon_for: delta must be in (0,1)");
  if (sigma == 0.0) return kInf;
  if (composed_delta(sigma, iterations, 0.0) <= delta) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  int growth = 0;
  while (composed_delta(sigma, iterations, hi) > delta) {
    hi *= 2.0;
    if (++growth > 200) throw SolverError("epsilon_for: failed to bracket");
  }
  while ((hi - lo) > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (composed_delta(sigma, iterations, mid) <= delta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double default_delta(std::size_t n_priv, DeltaLogBase base) {
  if (n_priv < 2) throw DomainError("default_delta: n_priv must be >= 2");
  const double n = static_cast<double>(n_priv);
  const double log_n = base == DeltaLogBase::kLn ? std::log(n) : std::log10(n);
  return 1.0 / (n * log_n);
}

PrivacySpec resolve(const RunConfig& cfg, std::size_t n_priv) {
  PrivacySpec spec;
  spec.iterations = cfg.iterations;
  spec.sensitivity = 1.0;

  std::optional<double> delta = cfg.delta;
  if (!delta && n_priv >= 2) delta = default_delta(n_priv, cfg.delta_log_base);

  if (cfg.sigma_override) {
    spec.sigma = *cfg.sigma_override;
    if (spec.sigma == 0.0) {
      spec.epsilon = kInf;
      spec.delta = delta.value_or(1.0);  // no noise: no slack claimed
      return spec;
    }
    if (!delta)
      throw ConfigError(
          "the default delta needs at least 2 private records; set delta explicitly");
    spec.delta = *delta;
    spec.epsilon = epsilon_for(spec.sigma, spec.delta, spec.iterations);
    return spec;
  }
  if (std::isinf(cfg.epsilon)) {
    spec.sigma = 0.0;
    spec.epsilon = kInf;
    spec.delta = delta.value_or(1.0);
    return spec;
  }
  if (!delta)
    throw ConfigError("the default delta needs at least 2 private records; set delta explicitly");
  spec.delta = *delta;
  spec.sigma = calibrate_sigma(cfg.epsilon, spec.delta, spec.iterations);
  spec.epsilon = cfg.epsilon;
  return spec;
}

}  // namespace augpe::privacy
