#include "rkde/bandwidth.hpp"

#include "rkde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkde {

namespace {

void
require_weights(std::span<const Observation> data, std::span<const double> weights)
{
  if (weights.size() != data.size())
    throw DomainError("one inverse propensity weight per observation required");
}

void
require_positive(double v, const char* what)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}

double
quantile_sorted(const std::vector<double>& sorted, double p)
{
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

double
floored(double raw)
{
  return std::isfinite(raw) ? std::max(raw, functional_floor) : functional_floor;
}

} // namespace

std::vector<double>
observed_values(std::span<const Observation> data)
{
  std::vector<double> v;
  v.reserve(data.size());
  for (const auto& o : data)
    if (o.is_observed())
      v.push_back(o.x);
  return v;
}

double
pilot_spread(std::span<const double> values)
{
  if (values.size() < 2)
    throw DomainError("pilot bandwidth needs at least two observed values");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  const double spread = std::min(sd, iqr / 1.349);
  if (!(spread > 0.0))
    throw DegenerateDataError("pilot bandwidth: observed values have zero spread");
  return spread;
}

double
pilot_bandwidth(std::span<const double> observed, double beta, std::size_t n)
{
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("pilot exponent must lie in (0, 1)");
  if (n == 0)
    throw DomainError("pilot bandwidth needs n >= 1");
  return std::pow(static_cast<double>(n), -beta) * pilot_spread(observed);
}

const char*
to_string(FunctionalMethod method)
{
  return method == FunctionalMethod::recursive ? "recursive" : "batch";
}

double
estimate_i1_recursive_raw(std::span<const Observation> data,
                          std::span<const double> inverse_weights,
                          double spread,
                          Kernel kernel)
{
  require_weights(data, inverse_weights);
  require_positive(spread, "pilot spread");
  const std::size_t n = data.size();
  if (n < 2)
    throw DomainError("I1 estimate needs n >= 2");

  const auto pilot = PilotSchedule::for_density(spread);
  const auto gains = recursive_weights(pilot.stepsize, n);

  // Per-term coefficient w_k (delta_k / pi_k) / b_k and inverse bandwidth.
  std::vector<double> coef(n, 0.0);
  std::vector<double> inv_b(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double b = pilot.bandwidth(k + 1);
    inv_b[k] = 1.0 / b;
    coef[k] = gains[k] * inverse_weights[k] / b;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inverse_weights[i] == 0.0)
      continue;
    const double xi = data[i].x;
    double f = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (coef[k] != 0.0)
        f += coef[k] * kernel((xi - data[k].x) * inv_b[k]);
    total += inverse_weights[i] * f;
  }
  return total / static_cast<double>(n);
}

double
estimate_i2_recursive_raw(std::span<const Observation> data,
                          std::span<const double> inverse_weights,
                          double spread,
                          Kernel kernel)
{
  require_weights(data, inverse_weights);
  require_positive(spread, "pilot spread");
  const std::size_t n = data.size();
  if (n < 2)
    throw DomainError("I2 estimate needs n >= 2");

  const auto pilot = PilotSchedule::for_second_derivative(spread);
  const auto gains = recursive_weights(pilot.stepsize, n);

  std::vector<double> coef(n, 0.0);
  std::vector<double> inv_b(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double b = pilot.bandwidth(k + 1);
    inv_b[k] = 1.0 / b;
    coef[k] = gains[k] * inverse_weights[k] / (b * b * b);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inverse_weights[i] == 0.0)
      continue;
    const double xi = data[i].x;
    double sum = 0.0;
    double diag = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (coef[k] == 0.0)
        continue;
      const double t = coef[k] * kernel.second_derivative((xi - data[k].x) * inv_b[k]);
      sum += t;
      diag += t * t;
    }
    total += inverse_weights[i] * (sum * sum - diag);
  }
  return total / static_cast<double>(n);
}

double
estimate_i1_batch_raw(std::span<const Observation> data,
                      std::span<const double> inverse_weights,
                      double b,
                      Kernel kernel)
{
  require_weights(data, inverse_weights);
  require_positive(b, "pilot bandwidth");
  const std::size_t n = data.size();
  if (n < 2)
    throw DomainError("I1 estimate needs n >= 2");

  const double inv_b = 1.0 / b;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inverse_weights[i] == 0.0)
      continue;
    const double xi = data[i].x;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && inverse_weights[j] != 0.0)
        s += inverse_weights[j] * kernel((xi - data[j].x) * inv_b);
    total += inverse_weights[i] * s;
  }
  const auto nd = static_cast<double>(n);
  return total / (nd * (nd - 1.0) * b);
}

double
estimate_i2_batch_raw(std::span<const Observation> data,
                      std::span<const double> inverse_weights,
                      double b_prime,
                      Kernel kernel)
{
  require_weights(data, inverse_weights);
  require_positive(b_prime, "pilot bandwidth");
  const std::size_t n = data.size();
  if (n < 2)
    throw DomainError("I2 estimate needs n >= 2");

  const double inv_b = 1.0 / b_prime;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inverse_weights[i] == 0.0)
      continue;
    const double xi = data[i].x;
    double sum = 0.0;
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (inverse_weights[j] == 0.0)
        continue;
      const double t = inverse_weights[j] * kernel.second_derivative((xi - data[j].x) * inv_b);
      sum += t;
      diag += t * t;
    }
    total += inverse_weights[i] * (sum * sum - diag);
  }
  const auto nd = static_cast<double>(n);
  const double b3 = b_prime * b_prime * b_prime;
  return total / (nd * nd * nd * b3 * b3);
}

double
estimate_i1_recursive(std::span<const Observation> data, const FittedPropensity& propensity)
{
  return floored(
    estimate_i1_recursive_raw(data, propensity.inverse_weights(data), pilot_spread(observed_values(data))));
}

double
estimate_i2_recursive(std::span<const Observation> data, const FittedPropensity& propensity)
{
  return floored(
    estimate_i2_recursive_raw(data, propensity.inverse_weights(data), pilot_spread(observed_values(data))));
}

double
estimate_i1_batch(std::span<const Observation> data, const FittedPropensity& propensity, double b)
{
  return floored(estimate_i1_batch_raw(data, propensity.inverse_weights(data), b));
}

double
estimate_i2_batch(std::span<const Observation> data, const FittedPropensity& propensity, double b_prime)
{
  return floored(estimate_i2_batch_raw(data, propensity.inverse_weights(data), b_prime));
}

FunctionalEstimates
estimate_functionals(std::span<const Observation> data,
                     const FittedPropensity& propensity,
                     FunctionalMethod method,
                     Kernel kernel)
{
  const auto weights = propensity.inverse_weights(data);
  const double spread = pilot_spread(observed_values(data));
  double raw1 = 0.0;
  double raw2 = 0.0;
  if (method == FunctionalMethod::recursive) {
    raw1 = estimate_i1_recursive_raw(data, weights, spread, kernel);
    raw2 = estimate_i2_recursive_raw(data, weights, spread, kernel);
  } else {
    const auto n = static_cast<double>(data.size());
    raw1 = estimate_i1_batch_raw(data, weights, std::pow(n, -pilot_exponent_i1) * spread, kernel);
    raw2 = estimate_i2_batch_raw(data, weights, std::pow(n, -pilot_exponent_i2) * spread, kernel);
  }
  FunctionalEstimates out;
  out.method = method;
  out.i1 = floored(raw1);
  out.i2 = floored(raw2);
  out.i1_floored = out.i1 != raw1;
  out.i2_floored = out.i2 != raw2;
  return out;
}

double
recursive_bandwidth_constant(double gamma0)
{
  if (!(gamma0 > 0.4))
    throw DomainError("global recursive bandwidth requires gamma0 > 2/5");
  return std::pow(2.0, -0.2) * std::pow(gamma0 - 0.4, 0.2);
}

double
batch_bandwidth_coefficient(double i1, double i2, const KernelConstants& constants)
{
  require_positive(i1, "I1");
  require_positive(i2, "I2");
  return std::pow(i1 / i2, 0.2) * std::pow(constants.r_k / (constants.mu2 * constants.mu2), 0.2);
}

double
global_bandwidth_coefficient(double i1, double i2, const KernelConstants& constants, double gamma0)
{
  return recursive_bandwidth_constant(gamma0) * batch_bandwidth_coefficient(i1, i2, constants);
}

double
plug_in_bandwidth(double coefficient, double pi_hat, std::size_t n)
{
  require_positive(coefficient, "bandwidth coefficient");
  if (!(pi_hat > 0.0 && pi_hat <= 1.0))
    throw DomainError("pi_hat must lie in (0, 1]");
  if (n == 0)
    throw DomainError("bandwidth needs n >= 1");
  return coefficient * std::pow(pi_hat, -0.2) * std::pow(static_cast<double>(n), -0.2);
}

double
local_bandwidth(double f_hat,
                double f2_hat,
                const KernelConstants& constants,
                double pi_hat,
                std::size_t n,
                EstimatorKind kind,
                double fallback,
                double curvature_eps)
{
  if (!(f_hat > 0.0) || !std::isfinite(f_hat))
    throw DomainError("local bandwidth needs a positive density estimate");
  if (!std::isfinite(f2_hat) || std::abs(f2_hat) < curvature_eps)
    throw InflectionFallbackError("curvature estimate too close to zero for the local bandwidth", fallback);
  const double lead = kind == EstimatorKind::recursive ? std::pow(0.3, 0.2) : 1.0;
  const double coefficient = lead * std::pow(f_hat / (f2_hat * f2_hat), 0.2) *
                             std::pow(constants.r_k / (constants.mu2 * constants.mu2), 0.2);
  return plug_in_bandwidth(coefficient, pi_hat, n);
}

double
amwise_leading_constant(AmwiseKind kind)
{
  if (kind.estimator == EstimatorKind::batch)
    return 1.25;
  if (!(kind.gamma0 > 0.4))
    throw DomainError("recursive AMWISE requires gamma0 > 2/5");
  return 1.25 * std::pow(2.0, -0.8) * kind.gamma0 * kind.gamma0 * std::pow(kind.gamma0 - 0.4, -1.2);
}

double
plug_in_amwise(double i1,
               double i2,
               const KernelConstants& constants,
               double pi_hat,
               std::size_t n,
               AmwiseKind kind)
{
  require_positive(i1, "I1");
  require_positive(i2, "I2");
  if (!(pi_hat > 0.0 && pi_hat <= 1.0))
    throw DomainError("pi_hat must lie in (0, 1]");
  if (n == 0)
    throw DomainError("AMWISE needs n >= 1");
  return amwise_leading_constant(kind) * std::pow(i1, 0.8) * std::pow(i2, 0.2) * constants.theta *
         std::pow(pi_hat, -0.8) * std::pow(static_cast<double>(n), -0.8);
}

} // namespace rkde
