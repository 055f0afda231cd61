#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rkde {

//! Pilot stepsize coefficients used when estimating int f^2 (and f(x)) and
//! int (f'')^2 f (and f''(x)) respectively.
inline constexpr double pilot_stepsize_i1 = 1.36;
inline constexpr double pilot_stepsize_i2 = 1.48;

//! Robbins-Monro gain gamma_n = gamma0 * n^(-alpha), alpha in (1/2, 1].
class StepsizeSchedule
{
public:
  StepsizeSchedule(double gamma0, double alpha = 1.0);

  double gamma0() const { return gamma0_; }
  double alpha() const { return alpha_; }

  //! gamma0 * n^(-alpha). Throws DomainError for n == 0.
  double operator()(std::size_t n) const;

  //! The gain actually applied by the estimators: min(gamma_n, 1). A factor
  //! of exactly 1 annihilates the history, so clamping at 1 acts as a
  //! restart (relevant for the pilot gains 1.36/n and 1.48/n at n = 1).
  double clamped(std::size_t n) const;

  //! lim n * gamma_n; +inf when alpha < 1.
  double limit_n_gamma() const;

  //! xi = lim (n gamma_n)^(-1).
  double xi() const;

  //! Smallest n0 with gamma_n <= 1 for every n >= n0.
  std::size_t first_index_at_most_one() const;

private:
  double gamma0_;
  double alpha_;
};

//! h_n = coefficient * n^(-a), a in (0, 1).
class BandwidthSchedule
{
public:
  BandwidthSchedule(double coefficient, double a);

  double coefficient() const { return coefficient_; }
  double exponent() const { return a_; }

  double operator()(std::size_t n) const;

private:
  double coefficient_;
  double a_;
};

//! Checks lim n*gamma_n > max{2a, (alpha - a)/2}, under which the leading
//! bias and variance terms of the recursive estimator hold simultaneously.
//! Throws DomainError when violated.
void
validate_schedule_pair(const StepsizeSchedule& step, const BandwidthSchedule& bandwidth);

//! Running product prod_{j >= j0} (1 - gamma_j) kept in log space.
//!
//! A factor gamma_j == 1 zeroes the full product; the accumulator records it
//! in `zero_flag()` and restarts the retained product at j0 = j + 1. The log
//! sum is compensated (Neumaier) so that 10^6 factors stay within 1e-12
//! relative of the exact product.
class ProductAccumulator
{
public:
  ProductAccumulator() = default;

  //! Appends factor (1 - gamma). Requires 0 < gamma <= 1.
  void update(double gamma);

  std::size_t count() const { return n_; }
  std::size_t first_retained_index() const { return j0_; }
  bool zero_flag() const { return zero_flag_; }
  double log_retained() const { return log_sum_ + log_comp_; }

  //! prod_{j=j0..n} (1 - gamma_j); 1 when nothing has been retained yet.
  double retained_product() const;

  //! prod_{j=1..n} (1 - gamma_j), i.e. 0 once any factor annihilated.
  double product() const;

private:
  std::size_t n_ = 0;
  std::size_t j0_ = 1;
  bool zero_flag_ = false;
  double log_sum_ = 0.0;
  double log_comp_ = 0.0;
};

//! Functional form of ProductAccumulator::update.
ProductAccumulator
update_product(ProductAccumulator acc, double gamma_next);

//! Weights w_k = g_k * prod_{j=k+1..n} (1 - g_j), k = 1..n, with g the
//! clamped gains of `step`. The recursion f_n = (1 - g_n) f_{n-1} + g_n Z_n
//! started from f_0 = 0 equals sum_k w_k Z_k.
std::vector<double>
recursive_weights(const StepsizeSchedule& step, std::size_t n);

//! Empirical Galambos-Seneta exponent n * (1 - v_{n-1} / v_n) at the last
//! index of `values` (1-based n = values.size()). Requires at least 10
//! strictly positive values.
double
gs_exponent_estimate(std::span<const double> values);

} // namespace rkde
