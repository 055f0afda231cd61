#pragma once

#include "rkde/density.hpp"
#include "rkde/propensity.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace rkde {

struct NormalSpec
{
  double mean = 0.0;
  double sd = 1.0;
};

//! Two-component normal mixture w N(first) + (1 - w) N(second).
struct MixtureSpec
{
  double weight = 0.5;
  NormalSpec first;
  NormalSpec second;
};

struct WeibullSpec
{
  double shape = 2.0;
  double scale = 1.0;
};

struct ExponentialSpec
{
  double rate = 1.0;
};

struct CauchySpec
{
  double location = 0.0;
  double scale = 1.0;
};

//! A target density with closed-form f, f'', CDF, quantile and a sampler.
class Distribution
{
public:
  using Spec = std::variant<NormalSpec, MixtureSpec, WeibullSpec, ExponentialSpec, CauchySpec>;

  //! Validates parameters; throws DomainError.
  explicit Distribution(Spec spec);

  static Distribution normal(double mean = 0.0, double sd = 1.0);
  static Distribution mixture(double weight, NormalSpec first, NormalSpec second);
  static Distribution weibull(double shape, double scale);
  static Distribution exponential(double rate);
  static Distribution cauchy(double location = 0.0, double scale = 1.0);

  const Spec& spec() const { return spec_; }

  //! Short identifier, e.g. "normal(0,1)".
  std::string name() const;

  double density(double x) const;
  double second_derivative(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  std::optional<double> mean() const;

  //! Support bounds (may be infinite).
  double lower() const;
  double upper() const;

  double sample(std::mt19937_64& rng) const;

private:
  Spec spec_;
};

//! Oracle values of I1 = int f^2 and I2 = int (f'')^2 f by adaptive
//! Gauss-Kronrod quadrature (relative tolerance 1e-10).
struct Functionals
{
  double i1;
  double i2;
};

Functionals
true_functionals(const Distribution& dist);

inline double
true_density(const Distribution& dist, double x)
{
  return dist.density(x);
}

inline double
true_second_derivative(const Distribution& dist, double x)
{
  return dist.second_derivative(x);
}

enum class MissingKind
{
  none,
  mcar,
  mar
};

//! Missingness mechanism.
//!
//! MCAR: delta ~ Bernoulli(1 - rate) independently.
//! MAR: aux = rho * T + sqrt(1 - rho^2) Z with Z ~ N(0, 1), and
//! delta ~ Bernoulli(logistic(intercept + slope * aux)); the intercept is
//! calibrated so that the marginal missing rate equals `rate`.
struct MissingnessSpec
{
  MissingKind kind = MissingKind::none;
  double rate = 0.0;
  double rho = 0.0;
  double slope = 1.0;
  double intercept = 0.0;

  static MissingnessSpec none();
  static MissingnessSpec mcar(double rate);
  //! Calibrates the intercept against `target`.
  static MissingnessSpec mar(double rate, double rho, const Distribution& target, double slope = 1.0);

  //! P(delta = 1 | aux) under MAR; 1 - rate under MCAR; 1 for none.
  double observe_probability(std::optional<double> aux) const;
};

//! Marginal P(delta = 0) of a MAR mechanism with the given intercept, by
//! quadrature over T and Z.
double
mar_missing_rate(const Distribution& target, double rho, double slope, double intercept);

std::string
to_string(const MissingnessSpec& spec);

struct SimulationConfig
{
  Distribution distribution = Distribution::normal();
  MissingnessSpec missing = MissingnessSpec::none();
  std::size_t n = 100;
  std::size_t replications = 500;
  std::size_t grid_points = 500;
  std::uint64_t seed = 20170101;

  void validate() const;
};

//! Engine seed for replication `rep`: splitmix64(splitmix64(seed) + rep).
std::uint64_t
replication_seed(std::uint64_t seed, std::uint64_t rep);

std::uint64_t
splitmix64(std::uint64_t x);

//! Deterministic sample of replication `rep`. Per item the draws are, in
//! order: T, then Z (MAR only), then the missingness uniform.
std::vector<Observation>
sample_replication(const SimulationConfig& config, std::uint64_t rep);

//! The known propensity of the generating mechanism.
PropensityModel
oracle_propensity(const MissingnessSpec& spec);

//! Grid over [min observed, max observed]; for Cauchy targets the range is
//! clipped to the central 99.5% quantile range.
EvaluationGrid
replication_grid(const SimulationConfig& config, std::span<const Observation> data);

} // namespace rkde
