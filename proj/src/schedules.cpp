#include "rkde/schedules.hpp"

#include "rkde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rkde {

StepsizeSchedule::StepsizeSchedule(double gamma0, double alpha)
  : gamma0_(gamma0)
  , alpha_(alpha)
{
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw DomainError("stepsize coefficient must be positive and finite");
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw DomainError("stepsize exponent must lie in (1/2, 1]");
}

double
StepsizeSchedule::operator()(std::size_t n) const
{
  if (n == 0)
    throw DomainError("stepsize index starts at 1");
  if (alpha_ == 1.0)
    return gamma0_ / static_cast<double>(n);
  return gamma0_ * std::pow(static_cast<double>(n), -alpha_);
}

double
StepsizeSchedule::clamped(std::size_t n) const
{
  return std::min((*this)(n), 1.0);
}

double
StepsizeSchedule::limit_n_gamma() const
{
  return alpha_ == 1.0 ? gamma0_ : std::numeric_limits<double>::infinity();
}

double
StepsizeSchedule::xi() const
{
  return alpha_ == 1.0 ? 1.0 / gamma0_ : 0.0;
}

std::size_t
StepsizeSchedule::first_index_at_most_one() const
{
  if (gamma0_ <= 1.0)
    return 1;
  auto n0 = static_cast<std::size_t>(std::ceil(std::pow(gamma0_, 1.0 / alpha_)));
  while (n0 > 1 && (*this)(n0 - 1) <= 1.0)
    --n0;
  while ((*this)(n0) > 1.0)
    ++n0;
  return n0;
}

BandwidthSchedule::BandwidthSchedule(double coefficient, double a)
  : coefficient_(coefficient)
  , a_(a)
{
  if (!(coefficient > 0.0) || !std::isfinite(coefficient))
    throw DomainError("bandwidth coefficient must be positive and finite");
  if (!(a > 0.0 && a < 1.0))
    throw DomainError("bandwidth exponent must lie in (0, 1)");
}

double
BandwidthSchedule::operator()(std::size_t n) const
{
  if (n == 0)
    throw DomainError("bandwidth index starts at 1");
  return coefficient_ * std::pow(static_cast<double>(n), -a_);
}

void
validate_schedule_pair(const StepsizeSchedule& step, const BandwidthSchedule& bandwidth)
{
  const double a = bandwidth.exponent();
  const double bound = std::max(2.0 * a, (step.alpha() - a) / 2.0);
  if (!(step.limit_n_gamma() > bound))
    throw DomainError("lim n*gamma_n = " + std::to_string(step.limit_n_gamma()) +
                      " must exceed max{2a, (alpha-a)/2} = " + std::to_string(bound));
}

void
ProductAccumulator::update(double gamma)
{
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("product factor requires 0 < gamma <= 1");
  ++n_;
  if (gamma == 1.0) {
    zero_flag_ = true;
    j0_ = n_ + 1;
    log_sum_ = 0.0;
    log_comp_ = 0.0;
    return;
  }
  const double term = std::log1p(-gamma);
  const double t = log_sum_ + term;
  if (std::abs(log_sum_) >= std::abs(term))
    log_comp_ += (log_sum_ - t) + term;
  else
    log_comp_ += (term - t) + log_sum_;
  log_sum_ = t;
}

double
ProductAccumulator::retained_product() const
{
  return std::exp(log_retained());
}

double
ProductAccumulator::product() const
{
  return zero_flag_ ? 0.0 : retained_product();
}

ProductAccumulator
update_product(ProductAccumulator acc, double gamma_next)
{
  acc.update(gamma_next);
  return acc;
}

std::vector<double>
recursive_weights(const StepsizeSchedule& step, std::size_t n)
{
  std::vector<double> w(n);
  double tail = 1.0;
  for (std::size_t k = n; k >= 1; --k) {
    const double g = step.clamped(k);
    w[k - 1] = g * tail;
    tail *= 1.0 - g;
  }
  return w;
}

double
gs_exponent_estimate(std::span<const double> values)
{
  if (values.size() < 10)
    throw DomainError("GS exponent estimate needs at least 10 values");
  for (double v : values)
    if (!(v > 0.0))
      throw DomainError("GS exponent estimate needs strictly positive values");
  const auto n = static_cast<double>(values.size());
  const double last = values[values.size() - 1];
  const double prev = values[values.size() - 2];
  return n * (1.0 - prev / last);
}

} // namespace rkde
