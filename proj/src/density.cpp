#include "rkde/density.hpp"

#include "rkde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rkde {

EvaluationGrid
EvaluationGrid::uniform(double lo, double hi, std::size_t count)
{
  if (count < 2)
    throw DomainError("evaluation grid needs at least two points");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
    throw DomainError("evaluation grid needs finite bounds with lo < hi");
  EvaluationGrid grid;
  grid.spacing_ = (hi - lo) / static_cast<double>(count - 1);
  grid.points_.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    grid.points_[i] = lo + static_cast<double>(i) * grid.spacing_;
  grid.points_.back() = hi;
  return grid;
}

EvaluationGrid::EvaluationGrid(std::vector<double> points)
  : points_(std::move(points))
{
  if (points_.size() < 2)
    throw DomainError("evaluation grid needs at least two points");
  spacing_ = (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
    throw DomainError("evaluation grid must be strictly increasing");
  const double tol = 1e-12 * std::max(1.0, std::abs(points_.back()) + std::abs(points_.front()));
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double step = points_[i] - points_[i - 1];
    if (!(step > 0.0) || std::abs(step - spacing_) > tol)
      throw DomainError("evaluation grid must be uniformly spaced");
  }
}

const char*
to_string(EstimatorKind kind)
{
  return kind == EstimatorKind::recursive ? "recursive" : "batch";
}

namespace {

double
interpolate(const EvaluationGrid& grid, std::span<const double> values, double x)
{
  if (!std::isfinite(x))
    throw DomainError("query point must be finite");
  if (x <= grid.front())
    return values.front();
  if (x >= grid.back())
    return values.back();
  const double pos = (x - grid.front()) / grid.spacing();
  auto i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

void
require_weights(std::span<const Observation> data, std::span<const double> weights)
{
  if (weights.size() != data.size())
    throw DomainError("one inverse propensity weight per observation required");
}

} // namespace

double
DensityEstimate::at(double x) const
{
  return interpolate(grid, values, x);
}

RecursiveKde::RecursiveKde(EvaluationGrid grid,
                           StepsizeSchedule stepsize,
                           BandwidthSchedule bandwidth,
                           PropensityScorer propensity,
                           Kernel kernel)
  : grid_(std::move(grid))
  , values_(grid_.size(), 0.0)
  , stepsize_(stepsize)
  , bandwidth_(bandwidth)
  , propensity_(std::move(propensity))
  , kernel_(kernel)
{}

void
RecursiveKde::update(const Observation& obs)
{
  if (!obs.is_observed()) {
    update(obs, 1.0);
    return;
  }
  update(obs, propensity_ ? propensity_(obs) : 1.0);
}

void
RecursiveKde::update(const Observation& obs, double pi)
{
  if (obs.is_observed() && !std::isfinite(obs.x))
    throw DomainError("observation must be finite");
  if (obs.is_observed() && !(pi > 0.0 && pi <= 1.0))
    throw DomainError("propensity must lie in (0, 1]");

  const std::size_t n = n_ + 1;
  const double gain = stepsize_.clamped(n);
  const double keep = 1.0 - gain;
  const auto pts = grid_.points();

  if (obs.is_observed()) {
    const double h = bandwidth_(n);
    const double scale = gain * (1.0 / pi) / h;
    const double inv_h = 1.0 / h;
    for (std::size_t i = 0; i < pts.size(); ++i)
      values_[i] = keep * values_[i] + scale * kernel_((pts[i] - obs.x) * inv_h);
  } else {
    for (auto& v : values_)
      v = keep * v;
  }
  n_ = n;
  grid_updates_ += pts.size();
}

double
RecursiveKde::at(double x) const
{
  return interpolate(grid_, values_, x);
}

DensityEstimate
RecursiveKde::estimate(EstimateMeta meta) const
{
  meta.kind = EstimatorKind::recursive;
  meta.n = n_;
  if (n_ > 0)
    meta.bandwidth = bandwidth_(n_);
  meta.bandwidth_coefficient = bandwidth_.coefficient();
  meta.gamma0 = stepsize_.gamma0();
  return { grid_, values_, meta };
}

RecursiveKde
recursive_update(RecursiveKde state, const Observation& obs)
{
  state.update(obs);
  return state;
}

RecursiveKde
resume(RecursiveKde state, std::span<const Observation> tail)
{
  for (const auto& obs : tail)
    state.update(obs);
  return state;
}

DensityEstimate
batch_ht_kde(std::span<const Observation> data,
             double h,
             std::span<const double> inverse_weights,
             const EvaluationGrid& grid,
             Kernel kernel)
{
  if (data.empty())
    throw DomainError("batch KDE of an empty sample");
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("batch KDE bandwidth must be positive");
  require_weights(data, inverse_weights);

  const auto pts = grid.points();
  std::vector<double> values(pts.size(), 0.0);
  const double inv_h = 1.0 / h;
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (!data[j].is_observed())
      continue;
    const double w = inverse_weights[j];
    const double xj = data[j].x;
    for (std::size_t i = 0; i < pts.size(); ++i)
      values[i] += w * kernel((pts[i] - xj) * inv_h);
  }
  const double norm = 1.0 / (static_cast<double>(data.size()) * h);
  for (auto& v : values)
    v *= norm;

  EstimateMeta meta;
  meta.kind = EstimatorKind::batch;
  meta.n = data.size();
  meta.bandwidth = h;
  meta.bandwidth_coefficient = h;
  return { grid, std::move(values), meta };
}

DensityEstimate
batch_ht_kde(std::span<const Observation> data,
             double h,
             const FittedPropensity& propensity,
             const EvaluationGrid& grid,
             Kernel kernel)
{
  auto est = batch_ht_kde(data, h, propensity.inverse_weights(data), grid, kernel);
  est.meta.propensity = propensity.resolved;
  est.meta.pi_hat = propensity.scalar;
  return est;
}

double
recursive_kde_at(std::span<const Observation> data,
                 double x,
                 std::span<const double> inverse_weights,
                 const StepsizeSchedule& stepsize,
                 const BandwidthSchedule& bandwidth,
                 Kernel kernel)
{
  if (!std::isfinite(x))
    throw DomainError("query point must be finite");
  require_weights(data, inverse_weights);
  double f = 0.0;
  for (std::size_t k = 1; k <= data.size(); ++k) {
    const double gain = stepsize.clamped(k);
    const auto& obs = data[k - 1];
    if (obs.is_observed()) {
      const double h = bandwidth(k);
      f = (1.0 - gain) * f + gain * inverse_weights[k - 1] / h * kernel((x - obs.x) / h);
    } else {
      f = (1.0 - gain) * f;
    }
  }
  return f;
}

double
batch_ht_kde_at(std::span<const Observation> data,
                double x,
                std::span<const double> inverse_weights,
                double h,
                Kernel kernel)
{
  if (data.empty())
    throw DomainError("batch KDE of an empty sample");
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("batch KDE bandwidth must be positive");
  require_weights(data, inverse_weights);
  double s = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j)
    if (data[j].is_observed())
      s += inverse_weights[j] * kernel((x - data[j].x) / h);
  return s / (static_cast<double>(data.size()) * h);
}

PilotSchedule
PilotSchedule::for_density(double spread)
{
  return { StepsizeSchedule(pilot_stepsize_i1), BandwidthSchedule(spread, 2.0 / 5.0) };
}

PilotSchedule
PilotSchedule::for_second_derivative(double spread)
{
  return { StepsizeSchedule(pilot_stepsize_i2), BandwidthSchedule(spread, 3.0 / 14.0) };
}

namespace {

template<typename Innovation>
double
pilot_recursion(std::span<const Observation> data,
                std::span<const double> inverse_weights,
                const PilotSchedule& pilot,
                Innovation innovation)
{
  if (data.empty())
    throw DomainError("pilot estimate of an empty sample");
  require_weights(data, inverse_weights);
  double g = 0.0;
  for (std::size_t k = 1; k <= data.size(); ++k) {
    const double gain = pilot.stepsize.clamped(k);
    const auto& obs = data[k - 1];
    double z = 0.0;
    if (obs.is_observed())
      z = inverse_weights[k - 1] * innovation(obs.x, pilot.bandwidth(k));
    g = (1.0 - gain) * g + gain * z;
  }
  return g;
}

} // namespace

double
local_pilot_density(std::span<const Observation> data,
                    double at,
                    std::span<const double> inverse_weights,
                    const PilotSchedule& pilot,
                    Kernel kernel)
{
  if (!std::isfinite(at))
    throw DomainError("query point must be finite");
  return pilot_recursion(data, inverse_weights, pilot, [&](double xk, double b) {
    return kernel((at - xk) / b) / b;
  });
}

double
local_pilot_second_derivative(std::span<const Observation> data,
                              double at,
                              std::span<const double> inverse_weights,
                              const PilotSchedule& pilot,
                              Kernel kernel)
{
  if (!std::isfinite(at))
    throw DomainError("query point must be finite");
  return pilot_recursion(data, inverse_weights, pilot, [&](double xk, double b) {
    return kernel.second_derivative((at - xk) / b) / (b * b * b);
  });
}

} // namespace rkde
