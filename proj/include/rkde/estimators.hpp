#pragma once

#include "rkde/bandwidth.hpp"
#include "rkde/density.hpp"
#include "rkde/propensity.hpp"

#include <optional>
#include <span>

namespace rkde {

// End-to-end plug-in estimators: a pilot pass fits the propensity model and
// the functionals, the plug-in step fixes the bandwidth, and the main pass
// runs the estimator over the same stream.

struct PhaseSeconds
{
  double pilot = 0.0;
  double plug_in = 0.0;
  double main = 0.0;

  double total() const { return pilot + plug_in + main; }
};

struct RecursiveOptions
{
  double gamma0 = 1.0;
  PropensityModel propensity = PropensityModel::recursive_nw();
  Kernel kernel{};
};

struct BatchOptions
{
  PropensityModel propensity = PropensityModel::nadaraya_watson();
  Kernel kernel{};
};

//! Everything fixed by the pilot pass of the recursive estimator.
struct RecursivePlan
{
  FittedPropensity propensity;
  FunctionalEstimates functionals;
  StepsizeSchedule stepsize{ 1.0 };
  //! h_k = coefficient * pi_hat^(-1/5) * k^(-1/5).
  BandwidthSchedule bandwidth{ 1.0, 0.2 };
  PhaseSeconds seconds;
};

struct BatchPlan
{
  FittedPropensity propensity;
  FunctionalEstimates functionals;
  double bandwidth = 0.0;
  PhaseSeconds seconds;
};

RecursivePlan
plan_recursive(std::span<const Observation> data, const RecursiveOptions& options = {});

//! Fresh state for the plan, ready to consume the stream.
RecursiveKde
make_recursive_state(const RecursivePlan& plan, EvaluationGrid grid, Kernel kernel = Kernel{});

BatchPlan
plan_batch(std::span<const Observation> data, const BatchOptions& options = {});

struct FitResult
{
  DensityEstimate estimate;
  PhaseSeconds seconds;
};

FitResult
fit_recursive(std::span<const Observation> data,
              const EvaluationGrid& grid,
              const RecursiveOptions& options = {});

FitResult
fit_batch(std::span<const Observation> data, const EvaluationGrid& grid, const BatchOptions& options = {});

//! Local estimate of f(x0) with the MSE-optimal plug-in bandwidth.
struct LocalEstimate
{
  double value = 0.0;
  double bandwidth = 0.0;
  double f_pilot = 0.0;
  double f2_pilot = 0.0;
  //! True when the curvature pilot was too flat and the pilot bandwidth was
  //! used instead.
  bool fallback = false;
};

//! Recursive local estimate: pilots f^(x0), f^''(x0) from the recursive
//! pilot recursions, h_k = coefficient * k^(-1/5) with the (3/10)^(1/5)
//! local constant, stepsize 1/k.
LocalEstimate
local_recursive_estimate(std::span<const Observation> data,
                         double x0,
                         const RecursiveOptions& options = {});

//! Batch local estimate: pilots from the batch KDE with b_n, b'_n.
LocalEstimate
local_batch_estimate(std::span<const Observation> data, double x0, const BatchOptions& options = {});

} // namespace rkde
