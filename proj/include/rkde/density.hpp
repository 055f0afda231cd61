#pragma once

#include "rkde/kernels.hpp"
#include "rkde/propensity.hpp"
#include "rkde/schedules.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rkde {

//! Strictly increasing, uniformly spaced design points.
class EvaluationGrid
{
public:
  //! `count` equally spaced points from `lo` to `hi` inclusive.
  static EvaluationGrid uniform(double lo, double hi, std::size_t count);

  //! Validates an explicit point set (>= 2 points, uniform to 1e-12).
  explicit EvaluationGrid(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double spacing() const { return spacing_; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

private:
  EvaluationGrid() = default;

  std::vector<double> points_;
  double spacing_ = 0.0;
};

enum class EstimatorKind
{
  recursive,
  batch
};

const char* to_string(EstimatorKind kind);

struct EstimateMeta
{
  EstimatorKind kind = EstimatorKind::recursive;
  std::size_t n = 0;
  //! h_n at the last observation (recursive) or the single h (batch).
  double bandwidth = 0.0;
  //! Coefficient c of h_k = c * k^(-a); equals `bandwidth` for batch.
  double bandwidth_coefficient = 0.0;
  std::optional<double> gamma0;
  PropensityKind propensity = PropensityKind::known;
  double pi_hat = 1.0;
};

//! Density values on a grid. Values may be negative; clamping is left to
//! report emission.
struct DensityEstimate
{
  EvaluationGrid grid;
  std::vector<double> values;
  EstimateMeta meta;

  //! Linear interpolation; constant extrapolation outside the grid.
  double at(double x) const;
};

using PropensityScorer = std::function<double(const Observation&)>;

//! Recursive stochastic-approximation KDE with Horvitz-Thompson weights:
//!
//!   f_n(x) = (1 - g_n) f_{n-1}(x) + g_n delta_n / pi_n / h_n K((x - X_n) / h_n)
//!
//! with f_0 = 0 and g_n the clamped stepsize. Each update is O(grid). The
//! bandwidth h_n is frozen from the schedule at the time X_n is consumed, so
//! continuing a state over more observations is exactly the same computation
//! as a from-scratch run.
class RecursiveKde
{
public:
  RecursiveKde(EvaluationGrid grid,
               StepsizeSchedule stepsize,
               BandwidthSchedule bandwidth,
               PropensityScorer propensity = {},
               Kernel kernel = Kernel{});

  //! Consumes one observation, scoring its propensity with the attached
  //! scorer (1 when none).
  void update(const Observation& obs);

  //! Consumes one observation with an explicit propensity.
  void update(const Observation& obs, double pi);

  std::size_t count() const { return n_; }
  const EvaluationGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const StepsizeSchedule& stepsize() const { return stepsize_; }
  const BandwidthSchedule& bandwidth() const { return bandwidth_; }

  //! Number of per-grid-point updates performed so far (n * |grid|).
  std::uint64_t grid_updates() const { return grid_updates_; }

  double at(double x) const;

  DensityEstimate estimate(EstimateMeta meta = {}) const;

private:
  EvaluationGrid grid_;
  std::vector<double> values_;
  std::size_t n_ = 0;
  StepsizeSchedule stepsize_;
  BandwidthSchedule bandwidth_;
  PropensityScorer propensity_;
  Kernel kernel_;
  std::uint64_t grid_updates_ = 0;
};

RecursiveKde
recursive_update(RecursiveKde state, const Observation& obs);

//! Continues `state` (built from observations 1..n1) over observations
//! n1+1..n. Bit-identical to sequential updates.
RecursiveKde
resume(RecursiveKde state, std::span<const Observation> tail);

//! Horvitz-Thompson KDE (n h)^-1 sum_i w_i K((x - X_i) / h), where
//! w_i = delta_i / pi_i is given per observation.
DensityEstimate
batch_ht_kde(std::span<const Observation> data,
             double h,
             std::span<const double> inverse_weights,
             const EvaluationGrid& grid,
             Kernel kernel = Kernel{});

DensityEstimate
batch_ht_kde(std::span<const Observation> data,
             double h,
             const FittedPropensity& propensity,
             const EvaluationGrid& grid,
             Kernel kernel = Kernel{});

//! f_n(x) at a single point, same recursion as RecursiveKde.
double
recursive_kde_at(std::span<const Observation> data,
                 double x,
                 std::span<const double> inverse_weights,
                 const StepsizeSchedule& stepsize,
                 const BandwidthSchedule& bandwidth,
                 Kernel kernel = Kernel{});

//! Batch Horvitz-Thompson KDE at a single point.
double
batch_ht_kde_at(std::span<const Observation> data,
                double x,
                std::span<const double> inverse_weights,
                double h,
                Kernel kernel = Kernel{});

//! Stepsize and bandwidth sequences of a pilot estimator.
struct PilotSchedule
{
  StepsizeSchedule stepsize;
  BandwidthSchedule bandwidth;

  //! Gain 1.36/n, bandwidth spread * n^(-2/5).
  static PilotSchedule for_density(double spread);
  //! Gain 1.48/n, bandwidth spread * n^(-3/14).
  static PilotSchedule for_second_derivative(double spread);
};

//! Recursive pilot estimate of f(at):
//!   g_k = (1 - b_k) g_{k-1} + b_k w_k / s_k K((at - X_k) / s_k)
//! with gains b_k, bandwidths s_k and w_k = delta_k / pi_k.
double
local_pilot_density(std::span<const Observation> data,
                    double at,
                    std::span<const double> inverse_weights,
                    const PilotSchedule& pilot,
                    Kernel kernel = Kernel{});

//! Recursive pilot estimate of f''(at) with the K'' innovation scaled by
//! s_k^-3.
double
local_pilot_second_derivative(std::span<const Observation> data,
                              double at,
                              std::span<const double> inverse_weights,
                              const PilotSchedule& pilot,
                              Kernel kernel = Kernel{});

} // namespace rkde
