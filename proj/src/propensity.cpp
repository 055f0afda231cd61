#include "rkde/propensity.hpp"

#include "rkde/bandwidth.hpp"
#include "rkde/errors.hpp"
#include "rkde/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace rkde {

namespace {

constexpr double min_denominator = 1e-300;

double
apply_floor(double pi, double floor)
{
  return std::clamp(pi, floor, 1.0);
}

void
check_floor(double floor)
{
  if (!(floor > 0.0 && floor <= 1.0))
    throw DomainError("propensity floor must lie in (0, 1]");
}

bool
has_aux(std::span<const Observation> data)
{
  return !data.empty() &&
         std::all_of(data.begin(), data.end(), [](const Observation& o) { return o.aux.has_value(); });
}

std::vector<double>
covariates(std::span<const Observation> data)
{
  std::vector<double> c;
  c.reserve(data.size());
  for (const auto& o : data)
    c.push_back(o.covariate());
  return c;
}

} // namespace

Observation
Observation::observed(double value, std::optional<double> aux)
{
  if (!std::isfinite(value))
    throw DomainError("observed value must be finite");
  return { value, 1, value, aux };
}

Observation
Observation::missing(std::optional<double> hidden, std::optional<double> aux)
{
  return { hidden, 0, 0.0, aux };
}

const char*
to_string(PropensityKind kind)
{
  switch (kind) {
    case PropensityKind::known:
      return "known";
    case PropensityKind::empirical:
      return "empirical";
    case PropensityKind::nadaraya_watson:
      return "nadaraya_watson";
    case PropensityKind::recursive_nw:
      return "recursive_nw";
  }
  return "unknown";
}

double
empirical_proportion(std::span<const Observation> data)
{
  if (data.empty())
    throw DomainError("empirical proportion of an empty sample");
  std::size_t seen = 0;
  for (const auto& o : data)
    seen += o.is_observed() ? 1 : 0;
  return static_cast<double>(seen) / static_cast<double>(data.size());
}

double
nw_propensity(std::span<const Observation> data, double at, double h, double floor)
{
  if (!std::isfinite(at))
    throw DomainError("propensity query point must be finite");
  if (!(h > 0.0))
    throw DomainError("propensity bandwidth must be positive");
  check_floor(floor);
  const Kernel kernel;
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : data) {
    const double w = kernel((at - o.covariate()) / h);
    den += w;
    if (o.is_observed())
      num += w;
  }
  if (!(den >= min_denominator))
    throw DegenerateWindowError("all Nadaraya-Watson weights vanish at the query point");
  return apply_floor(num / den, floor);
}

RecursiveNwPropensity::RecursiveNwPropensity(BandwidthSchedule schedule,
                                             std::vector<double> query_points,
                                             double floor)
  : schedule_(schedule)
  , points_(std::move(query_points))
  , num_(points_.size(), 0.0)
  , den_(points_.size(), 0.0)
  , floor_(floor)
{
  check_floor(floor);
}

void
RecursiveNwPropensity::update(const Observation& obs)
{
  update(obs, schedule_(terms_.size() + 1));
}

void
RecursiveNwPropensity::update(const Observation& obs, double h)
{
  const double c = obs.covariate();
  if (!std::isfinite(c))
    throw DomainError("propensity covariate must be finite");
  if (!(h > 0.0))
    throw DomainError("propensity bandwidth must be positive");
  const Kernel kernel;
  for (std::size_t q = 0; q < points_.size(); ++q) {
    const double w = kernel((points_[q] - c) / h) / h;
    den_[q] += w;
    if (obs.is_observed())
      num_[q] += w;
  }
  terms_.push_back({ c, h, obs.delta });
}

double
RecursiveNwPropensity::finish(double num, double den) const
{
  if (!(den >= min_denominator))
    throw DegenerateWindowError("all recursive Nadaraya-Watson weights vanish at the query point");
  return apply_floor(num / den, floor_);
}

double
RecursiveNwPropensity::query(double at) const
{
  if (!std::isfinite(at))
    throw DomainError("propensity query point must be finite");
  const Kernel kernel;
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : terms_) {
    const double w = kernel((at - t.c) / t.h) / t.h;
    den += w;
    if (t.delta == 1)
      num += w;
  }
  return finish(num, den);
}

double
RecursiveNwPropensity::query_point(std::size_t index) const
{
  return finish(num_.at(index), den_.at(index));
}

PropensityModel
PropensityModel::known(double pi)
{
  if (!(pi > 0.0 && pi <= 1.0))
    throw DomainError("known propensity must lie in (0, 1]");
  PropensityModel m;
  m.kind = PropensityKind::known;
  m.constant = pi;
  return m;
}

PropensityModel
PropensityModel::known(std::function<double(const Observation&)> pi)
{
  PropensityModel m;
  m.kind = PropensityKind::known;
  m.function = std::move(pi);
  return m;
}

PropensityModel
PropensityModel::empirical()
{
  return {};
}

PropensityModel
PropensityModel::nadaraya_watson(std::optional<double> bandwidth)
{
  PropensityModel m;
  m.kind = PropensityKind::nadaraya_watson;
  m.bandwidth = bandwidth;
  return m;
}

PropensityModel
PropensityModel::recursive_nw(std::optional<double> coefficient)
{
  PropensityModel m;
  m.kind = PropensityKind::recursive_nw;
  m.bandwidth = coefficient;
  return m;
}

std::vector<double>
FittedPropensity::inverse_weights(std::span<const Observation> data) const
{
  std::vector<double> w(data.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].is_observed())
      w[i] = 1.0 / score(data[i]);
  return w;
}

FittedPropensity
fit_propensity(const PropensityModel& model, std::span<const Observation> data)
{
  check_floor(model.floor);
  if (data.empty())
    throw DomainError("cannot fit a propensity model to an empty sample");

  FittedPropensity fit;
  fit.requested = model.kind;
  fit.resolved = model.kind;
  fit.floor = model.floor;
  const double floor = model.floor;

  auto empirical = [&] {
    const double pi = apply_floor(empirical_proportion(data), floor);
    fit.resolved = PropensityKind::empirical;
    fit.scalar = pi;
    fit.score = [pi](const Observation&) { return pi; };
  };

  switch (model.kind) {
    case PropensityKind::known: {
      if (model.function) {
        auto fn = model.function;
        fit.score = [fn, floor](const Observation& o) { return apply_floor(fn(o), floor); };
        double sum = 0.0;
        for (const auto& o : data)
          sum += fit.score(o);
        fit.scalar = sum / static_cast<double>(data.size());
      } else {
        const double pi = apply_floor(model.constant, floor);
        fit.score = [pi](const Observation&) { return pi; };
        fit.scalar = pi;
      }
      return fit;
    }
    case PropensityKind::empirical:
      empirical();
      return fit;
    case PropensityKind::nadaraya_watson: {
      if (!has_aux(data)) {
        empirical();
        return fit;
      }
      const auto c = covariates(data);
      const double h = model.bandwidth ? *model.bandwidth : pilot_bandwidth(c, 0.2, c.size());
      auto snapshot = std::make_shared<const std::vector<Observation>>(data.begin(), data.end());
      fit.score = [snapshot, h, floor](const Observation& o) {
        return nw_propensity(*snapshot, o.covariate(), h, floor);
      };
      break;
    }
    case PropensityKind::recursive_nw: {
      if (!has_aux(data)) {
        empirical();
        return fit;
      }
      const auto c = covariates(data);
      const double coefficient = model.bandwidth ? *model.bandwidth : pilot_spread(c);
      auto state = std::make_shared<RecursiveNwPropensity>(BandwidthSchedule(coefficient, 0.2),
                                                           std::vector<double>{}, floor);
      for (const auto& o : data)
        state->update(o);
      fit.score = [state = std::shared_ptr<const RecursiveNwPropensity>(state)](const Observation& o) {
        return state->query(o.covariate());
      };
      break;
    }
  }

  double sum = 0.0;
  for (const auto& o : data)
    sum += fit.score(o);
  fit.scalar = sum / static_cast<double>(data.size());
  return fit;
}

} // namespace rkde
