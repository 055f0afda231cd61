#pragma once

#include "rkde/schedules.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rkde {

//! One stream element. `x = delta * t`; when `delta == 0` the estimators
//! never read `t` (simulations keep it for oracle metrics).
struct Observation
{
  std::optional<double> t;
  int delta = 0;
  double x = 0.0;
  std::optional<double> aux;

  static Observation observed(double value, std::optional<double> aux = {});
  static Observation missing(std::optional<double> hidden = {}, std::optional<double> aux = {});

  bool is_observed() const { return delta == 1; }

  //! The variable the propensity smoothers condition on: aux when present,
  //! otherwise x.
  double covariate() const { return aux ? *aux : x; }
};

inline constexpr double default_propensity_floor = 0.05;

enum class PropensityKind
{
  known,
  empirical,
  nadaraya_watson,
  recursive_nw
};

const char* to_string(PropensityKind kind);

//! Mean of delta. Throws DomainError on empty input.
double
empirical_proportion(std::span<const Observation> data);

//! Local-mean estimate sum_j delta_j K((at - c_j)/h) / sum_j K((at - c_j)/h)
//! clamped to [floor, 1], with c_j = covariate(). Throws
//! DegenerateWindowError when the denominator falls below 1e-300.
double
nw_propensity(std::span<const Observation> data,
              double at,
              double h,
              double floor = default_propensity_floor);

//! Semi-recursive local mean with per-observation bandwidths h_j:
//! sum_j delta_j h_j^-1 K((at - c_j)/h_j) / sum_j h_j^-1 K((at - c_j)/h_j).
//!
//! Numerator and denominator are accumulated at a fixed set of query points
//! so an append costs O(#query points); other points are answered from the
//! retained terms in O(n).
class RecursiveNwPropensity
{
public:
  RecursiveNwPropensity(BandwidthSchedule schedule,
                        std::vector<double> query_points = {},
                        double floor = default_propensity_floor);

  void update(const Observation& obs);

  //! Appends with an explicit bandwidth instead of the schedule's h_n.
  void update(const Observation& obs, double h);

  double query(double at) const;
  double query_point(std::size_t index) const;

  std::size_t count() const { return terms_.size(); }
  std::span<const double> query_points() const { return points_; }

private:
  struct Term
  {
    double c;
    double h;
    int delta;
  };

  double finish(double num, double den) const;

  BandwidthSchedule schedule_;
  std::vector<double> points_;
  std::vector<double> num_;
  std::vector<double> den_;
  std::vector<Term> terms_;
  double floor_;
};

//! How propensities are obtained. `bandwidth` left empty selects the pilot
//! rule with exponent 1/5 over the covariates.
struct PropensityModel
{
  PropensityKind kind = PropensityKind::empirical;
  double constant = 1.0;
  std::function<double(const Observation&)> function;
  std::optional<double> bandwidth;
  double floor = default_propensity_floor;

  static PropensityModel known(double pi);
  static PropensityModel known(std::function<double(const Observation&)> pi);
  static PropensityModel empirical();
  static PropensityModel nadaraya_watson(std::optional<double> bandwidth = {});
  static PropensityModel recursive_nw(std::optional<double> coefficient = {});
};

//! A propensity model fitted to one data set.
//!
//! `resolved` differs from the requested kind when the smoothers fall back to
//! the empirical proportion (no auxiliary covariate: MCAR assumed).
//! `scalar` is the population-level pi-hat used by the bandwidth formulas.
struct FittedPropensity
{
  PropensityKind requested = PropensityKind::empirical;
  PropensityKind resolved = PropensityKind::empirical;
  double scalar = 1.0;
  double floor = default_propensity_floor;
  std::function<double(const Observation&)> score;

  //! delta_i / pi_i for every observation (0 for missing ones).
  std::vector<double> inverse_weights(std::span<const Observation> data) const;
};

FittedPropensity
fit_propensity(const PropensityModel& model, std::span<const Observation> data);

} // namespace rkde
