#include "rkde/estimators.hpp"

#include "rkde/errors.hpp"

#include <chrono>
#include <cmath>

namespace rkde {

namespace {

using clock = std::chrono::steady_clock;

double
seconds_since(clock::time_point start)
{
  return std::chrono::duration<double>(clock::now() - start).count();
}

} // namespace

RecursivePlan
plan_recursive(std::span<const Observation> data, const RecursiveOptions& options)
{
  auto start = clock::now();
  auto propensity = fit_propensity(options.propensity, data);
  auto functionals = estimate_functionals(data, propensity, FunctionalMethod::recursive, options.kernel);
  const double pilot_seconds = seconds_since(start);

  start = clock::now();
  const auto constants = options.kernel.constants();
  const double coefficient =
    global_bandwidth_coefficient(functionals.i1, functionals.i2, constants, options.gamma0) *
    std::pow(propensity.scalar, -0.2);
  RecursivePlan plan{ std::move(propensity),
                      functionals,
                      StepsizeSchedule(options.gamma0),
                      BandwidthSchedule(coefficient, 0.2),
                      {} };
  plan.seconds.pilot = pilot_seconds;
  plan.seconds.plug_in = seconds_since(start);
  return plan;
}

RecursiveKde
make_recursive_state(const RecursivePlan& plan, EvaluationGrid grid, Kernel kernel)
{
  return RecursiveKde(std::move(grid), plan.stepsize, plan.bandwidth, plan.propensity.score, kernel);
}

BatchPlan
plan_batch(std::span<const Observation> data, const BatchOptions& options)
{
  auto start = clock::now();
  auto propensity = fit_propensity(options.propensity, data);
  auto functionals = estimate_functionals(data, propensity, FunctionalMethod::batch, options.kernel);
  const double pilot_seconds = seconds_since(start);

  start = clock::now();
  const double coefficient =
    batch_bandwidth_coefficient(functionals.i1, functionals.i2, options.kernel.constants());
  const double h = plug_in_bandwidth(coefficient, propensity.scalar, data.size());
  BatchPlan plan{ std::move(propensity), functionals, h, {} };
  plan.seconds.pilot = pilot_seconds;
  plan.seconds.plug_in = seconds_since(start);
  return plan;
}

FitResult
fit_recursive(std::span<const Observation> data, const EvaluationGrid& grid, const RecursiveOptions& options)
{
  auto plan = plan_recursive(data, options);
  const auto start = clock::now();
  auto state = make_recursive_state(plan, grid, options.kernel);
  const auto weights = plan.propensity.inverse_weights(data);
  for (std::size_t i = 0; i < data.size(); ++i)
    state.update(data[i], data[i].is_observed() ? 1.0 / weights[i] : 1.0);
  plan.seconds.main = seconds_since(start);

  EstimateMeta meta;
  meta.propensity = plan.propensity.resolved;
  meta.pi_hat = plan.propensity.scalar;
  return { state.estimate(meta), plan.seconds };
}

FitResult
fit_batch(std::span<const Observation> data, const EvaluationGrid& grid, const BatchOptions& options)
{
  auto plan = plan_batch(data, options);
  const auto start = clock::now();
  auto estimate = batch_ht_kde(data, plan.bandwidth, plan.propensity.inverse_weights(data), grid, options.kernel);
  plan.seconds.main = seconds_since(start);
  estimate.meta.propensity = plan.propensity.resolved;
  estimate.meta.pi_hat = plan.propensity.scalar;
  return { std::move(estimate), plan.seconds };
}

LocalEstimate
local_recursive_estimate(std::span<const Observation> data, double x0, const RecursiveOptions& options)
{
  const auto propensity = fit_propensity(options.propensity, data);
  const auto weights = propensity.inverse_weights(data);
  const double spread = pilot_spread(observed_values(data));
  const std::size_t n = data.size();

  LocalEstimate out;
  out.f_pilot = local_pilot_density(data, x0, weights, PilotSchedule::for_density(spread), options.kernel);
  out.f2_pilot =
    local_pilot_second_derivative(data, x0, weights, PilotSchedule::for_second_derivative(spread), options.kernel);

  const double pilot_h = std::pow(static_cast<double>(n), -pilot_exponent_i1) * spread;
  try {
    out.bandwidth = local_bandwidth(
      out.f_pilot, out.f2_pilot, options.kernel.constants(), propensity.scalar, n, EstimatorKind::recursive, pilot_h);
  } catch (const InflectionFallbackError& e) {
    out.bandwidth = e.suggested_bandwidth();
    out.fallback = true;
  } catch (const DomainError&) {
    out.bandwidth = pilot_h;
    out.fallback = true;
  }

  // h_k = c k^(-1/5) with h_n equal to the selected bandwidth.
  const double coefficient = out.bandwidth * std::pow(static_cast<double>(n), 0.2);
  out.value =
    recursive_kde_at(data, x0, weights, StepsizeSchedule(1.0), BandwidthSchedule(coefficient, 0.2), options.kernel);
  return out;
}

LocalEstimate
local_batch_estimate(std::span<const Observation> data, double x0, const BatchOptions& options)
{
  const auto propensity = fit_propensity(options.propensity, data);
  const auto weights = propensity.inverse_weights(data);
  const double spread = pilot_spread(observed_values(data));
  const std::size_t n = data.size();
  const auto nd = static_cast<double>(n);
  const double b = std::pow(nd, -pilot_exponent_i1) * spread;
  const double b_prime = std::pow(nd, -pilot_exponent_i2) * spread;

  LocalEstimate out;
  out.f_pilot = batch_ht_kde_at(data, x0, weights, b, options.kernel);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (data[i].is_observed())
      s += weights[i] * options.kernel.second_derivative((x0 - data[i].x) / b_prime);
  out.f2_pilot = s / (nd * b_prime * b_prime * b_prime);

  try {
    out.bandwidth = local_bandwidth(
      out.f_pilot, out.f2_pilot, options.kernel.constants(), propensity.scalar, n, EstimatorKind::batch, b);
  } catch (const InflectionFallbackError& e) {
    out.bandwidth = e.suggested_bandwidth();
    out.fallback = true;
  } catch (const DomainError&) {
    out.bandwidth = b;
    out.fallback = true;
  }
  out.value = batch_ht_kde_at(data, x0, weights, out.bandwidth, options.kernel);
  return out;
}

} // namespace rkde
