#include "rkde/simulate.hpp"

#include "rkde/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rkde {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double
normal_pdf(const NormalSpec& s, double x)
{
  const double z = (x - s.mean) / s.sd;
  return inv_sqrt_2pi / s.sd * std::exp(-0.5 * z * z);
}

// d^2/dx^2 of the N(mean, sd^2) density: ((x - m)^2 / s^4 - 1 / s^2) phi.
double
normal_pdf2(const NormalSpec& s, double x)
{
  const double z = (x - s.mean) / s.sd;
  return (z * z - 1.0) / (s.sd * s.sd) * normal_pdf(s, x);
}

double
normal_cdf(const NormalSpec& s, double x)
{
  return 0.5 * std::erfc(-(x - s.mean) / (s.sd * std::numbers::sqrt2));
}

void
check_normal(const NormalSpec& s)
{
  if (!std::isfinite(s.mean) || !(s.sd > 0.0) || !std::isfinite(s.sd))
    throw DomainError("normal: sd must be positive and parameters finite");
}

//! Uniform on the open interval (0, 1) from the top 53 bits.
double
uniform_open(std::mt19937_64& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double
standard_normal(std::mt19937_64& rng)
{
  // Box-Muller, one variate per call so the draw count per item is fixed.
  const double u1 = uniform_open(rng);
  const double u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double
logistic(double t)
{
  return 1.0 / (1.0 + std::exp(-t));
}

template<typename F>
double
integrate(F f, double a, double b)
{
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-10);
}

} // namespace

Distribution::Distribution(Spec spec)
  : spec_(std::move(spec))
{
  std::visit(overloaded{
               [](const NormalSpec& s) { check_normal(s); },
               [](const MixtureSpec& s) {
                 if (!(s.weight >= 0.0 && s.weight <= 1.0))
                   throw DomainError("mixture: weight must lie in [0, 1]");
                 check_normal(s.first);
                 check_normal(s.second);
               },
               [](const WeibullSpec& s) {
                 if (!(s.shape > 0.0) || !(s.scale > 0.0))
                   throw DomainError("weibull: shape and scale must be positive");
               },
               [](const ExponentialSpec& s) {
                 if (!(s.rate > 0.0))
                   throw DomainError("exponential: rate must be positive");
               },
               [](const CauchySpec& s) {
                 if (!(s.scale > 0.0) || !std::isfinite(s.location))
                   throw DomainError("cauchy: scale must be positive");
               },
             },
             spec_);
}

Distribution
Distribution::normal(double mean, double sd)
{
  return Distribution(NormalSpec{ mean, sd });
}

Distribution
Distribution::mixture(double weight, NormalSpec first, NormalSpec second)
{
  return Distribution(MixtureSpec{ weight, first, second });
}

Distribution
Distribution::weibull(double shape, double scale)
{
  return Distribution(WeibullSpec{ shape, scale });
}

Distribution
Distribution::exponential(double rate)
{
  return Distribution(ExponentialSpec{ rate });
}

Distribution
Distribution::cauchy(double location, double scale)
{
  return Distribution(CauchySpec{ location, scale });
}

std::string
Distribution::name() const
{
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{
               [&](const NormalSpec& s) { os << "normal(" << s.mean << "," << s.sd << ")"; },
               [&](const MixtureSpec& s) {
                 os << "mixture(" << s.weight << ";" << s.first.mean << "," << s.first.sd << ";" << s.second.mean
                    << "," << s.second.sd << ")";
               },
               [&](const WeibullSpec& s) { os << "weibull(" << s.shape << "," << s.scale << ")"; },
               [&](const ExponentialSpec& s) { os << "exponential(" << s.rate << ")"; },
               [&](const CauchySpec& s) { os << "cauchy(" << s.location << "," << s.scale << ")"; },
             },
             spec_);
  return os.str();
}

double
Distribution::density(double x) const
{
  return std::visit(overloaded{
                      [&](const NormalSpec& s) { return normal_pdf(s, x); },
                      [&](const MixtureSpec& s) {
                        return s.weight * normal_pdf(s.first, x) + (1.0 - s.weight) * normal_pdf(s.second, x);
                      },
                      [&](const WeibullSpec& s) {
                        if (x < 0.0)
                          return 0.0;
                        const double z = x / s.scale;
                        return s.shape / s.scale * std::pow(z, s.shape - 1.0) * std::exp(-std::pow(z, s.shape));
                      },
                      [&](const ExponentialSpec& s) { return x < 0.0 ? 0.0 : s.rate * std::exp(-s.rate * x); },
                      [&](const CauchySpec& s) {
                        const double u = (x - s.location) / s.scale;
                        return 1.0 / (std::numbers::pi * s.scale * (1.0 + u * u));
                      },
                    },
                    spec_);
}

double
Distribution::second_derivative(double x) const
{
  return std::visit(
    overloaded{
      [&](const NormalSpec& s) { return normal_pdf2(s, x); },
      [&](const MixtureSpec& s) {
        return s.weight * normal_pdf2(s.first, x) + (1.0 - s.weight) * normal_pdf2(s.second, x);
      },
      [&](const WeibullSpec& s) {
        if (x <= 0.0)
          return 0.0;
        // With z = x / l and k = shape:
        //   f(x)   = (k/l) z^(k-1) e^(-z^k)
        //   f''(x) = (k/l^3) e^(-z^k) [ (k-1)(k-2) z^(k-3) - 3k(k-1) z^(2k-3) + k^2 z^(3k-3) ]
        // For k = 2, l = 1 this is (8x^3 - 12x) e^(-x^2).
        const double k = s.shape;
        const double z = x / s.scale;
        double bracket = -3.0 * k * (k - 1.0) * std::pow(z, 2.0 * k - 3.0) + k * k * std::pow(z, 3.0 * k - 3.0);
        if ((k - 1.0) * (k - 2.0) != 0.0)
          bracket += (k - 1.0) * (k - 2.0) * std::pow(z, k - 3.0);
        return k / (s.scale * s.scale * s.scale) * std::exp(-std::pow(z, k)) * bracket;
      },
      [&](const ExponentialSpec& s) { return x < 0.0 ? 0.0 : s.rate * s.rate * s.rate * std::exp(-s.rate * x); },
      [&](const CauchySpec& s) {
        // f = 1/(pi s (1+u^2)), f'' = (6u^2 - 2) / (pi s^3 (1+u^2)^3).
        const double u = (x - s.location) / s.scale;
        const double q = 1.0 + u * u;
        return (6.0 * u * u - 2.0) / (std::numbers::pi * s.scale * s.scale * s.scale * q * q * q);
      },
    },
    spec_);
}

double
Distribution::cdf(double x) const
{
  return std::visit(overloaded{
                      [&](const NormalSpec& s) { return normal_cdf(s, x); },
                      [&](const MixtureSpec& s) {
                        return s.weight * normal_cdf(s.first, x) + (1.0 - s.weight) * normal_cdf(s.second, x);
                      },
                      [&](const WeibullSpec& s) {
                        return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / s.scale, s.shape));
                      },
                      [&](const ExponentialSpec& s) { return x <= 0.0 ? 0.0 : -std::expm1(-s.rate * x); },
                      [&](const CauchySpec& s) {
                        return 0.5 + std::atan((x - s.location) / s.scale) / std::numbers::pi;
                      },
                    },
                    spec_);
}

double
Distribution::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("quantile level must lie in (0, 1)");
  return std::visit(overloaded{
                      [&](const NormalSpec& s) {
                        return boost::math::quantile(boost::math::normal(s.mean, s.sd), p);
                      },
                      [&](const MixtureSpec& s) {
                        double lo = std::min(s.first.mean - 40.0 * s.first.sd, s.second.mean - 40.0 * s.second.sd);
                        double hi = std::max(s.first.mean + 40.0 * s.first.sd, s.second.mean + 40.0 * s.second.sd);
                        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
                          const double mid = 0.5 * (lo + hi);
                          (cdf(mid) < p ? lo : hi) = mid;
                        }
                        return 0.5 * (lo + hi);
                      },
                      [&](const WeibullSpec& s) { return s.scale * std::pow(-std::log1p(-p), 1.0 / s.shape); },
                      [&](const ExponentialSpec& s) { return -std::log1p(-p) / s.rate; },
                      [&](const CauchySpec& s) {
                        return s.location + s.scale * std::tan(std::numbers::pi * (p - 0.5));
                      },
                    },
                    spec_);
}

std::optional<double>
Distribution::mean() const
{
  return std::visit(overloaded{
                      [](const NormalSpec& s) -> std::optional<double> { return s.mean; },
                      [](const MixtureSpec& s) -> std::optional<double> {
                        return s.weight * s.first.mean + (1.0 - s.weight) * s.second.mean;
                      },
                      [](const WeibullSpec& s) -> std::optional<double> {
                        return s.scale * std::tgamma(1.0 + 1.0 / s.shape);
                      },
                      [](const ExponentialSpec& s) -> std::optional<double> { return 1.0 / s.rate; },
                      [](const CauchySpec&) -> std::optional<double> { return std::nullopt; },
                    },
                    spec_);
}

double
Distribution::lower() const
{
  if (std::holds_alternative<WeibullSpec>(spec_) || std::holds_alternative<ExponentialSpec>(spec_))
    return 0.0;
  return -inf;
}

double
Distribution::upper() const
{
  return inf;
}

double
Distribution::sample(std::mt19937_64& rng) const
{
  return std::visit(overloaded{
                      [&](const NormalSpec& s) { return s.mean + s.sd * standard_normal(rng); },
                      [&](const MixtureSpec& s) {
                        const double u = uniform_open(rng);
                        const double z = standard_normal(rng);
                        const auto& c = u < s.weight ? s.first : s.second;
                        return c.mean + c.sd * z;
                      },
                      [&](const WeibullSpec& s) {
                        return s.scale * std::pow(-std::log(uniform_open(rng)), 1.0 / s.shape);
                      },
                      [&](const ExponentialSpec& s) { return -std::log(uniform_open(rng)) / s.rate; },
                      [&](const CauchySpec& s) {
                        return s.location + s.scale * std::tan(std::numbers::pi * (uniform_open(rng) - 0.5));
                      },
                    },
                    spec_);
}

Functionals
true_functionals(const Distribution& dist)
{
  const double a = dist.lower();
  const double b = dist.upper();
  const double i1 = integrate(
    [&](double x) {
      const double f = dist.density(x);
      return f * f;
    },
    a,
    b);
  const double i2 = integrate(
    [&](double x) {
      const double f2 = dist.second_derivative(x);
      return f2 * f2 * dist.density(x);
    },
    a,
    b);
  return { i1, i2 };
}

MissingnessSpec
MissingnessSpec::none()
{
  return {};
}

MissingnessSpec
MissingnessSpec::mcar(double rate)
{
  if (!(rate >= 0.0 && rate < 1.0))
    throw DomainError("MCAR missing rate must lie in [0, 1)");
  MissingnessSpec s;
  s.kind = rate == 0.0 ? MissingKind::none : MissingKind::mcar;
  s.rate = rate;
  return s;
}

double
mar_missing_rate(const Distribution& target, double rho, double slope, double intercept)
{
  using boost::math::quadrature::gauss_kronrod;
  const double s = std::sqrt(1.0 - rho * rho);
  const double observed = integrate(
    [&](double t) {
      const double f = target.density(t);
      if (f == 0.0)
        return 0.0;
      const double inner = gauss_kronrod<double, 31>::integrate(
        [&](double z) { return logistic(intercept + slope * (rho * t + s * z)) * inv_sqrt_2pi * std::exp(-0.5 * z * z); },
        -12.0,
        12.0,
        8,
        1e-11);
      return f * inner;
    },
    target.lower(),
    target.upper());
  return 1.0 - observed;
}

MissingnessSpec
MissingnessSpec::mar(double rate, double rho, const Distribution& target, double slope)
{
  if (!(rate > 0.0 && rate < 1.0))
    throw DomainError("MAR missing rate must lie in (0, 1)");
  if (!(rho > -1.0 && rho < 1.0))
    throw DomainError("MAR correlation must lie in (-1, 1)");
  if (!(slope != 0.0) || !std::isfinite(slope))
    throw DomainError("MAR slope must be finite and non-zero");

  // The missing rate decreases monotonically in the intercept.
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mar_missing_rate(target, rho, slope, mid) > rate ? lo : hi) = mid;
  }
  MissingnessSpec s;
  s.kind = MissingKind::mar;
  s.rate = rate;
  s.rho = rho;
  s.slope = slope;
  s.intercept = 0.5 * (lo + hi);
  return s;
}

double
MissingnessSpec::observe_probability(std::optional<double> aux) const
{
  switch (kind) {
    case MissingKind::none:
      return 1.0;
    case MissingKind::mcar:
      return 1.0 - rate;
    case MissingKind::mar:
      if (!aux)
        throw DomainError("MAR propensity needs the auxiliary covariate");
      return logistic(intercept + slope * *aux);
  }
  return 1.0;
}

std::string
to_string(const MissingnessSpec& spec)
{
  std::ostringstream os;
  os.precision(6);
  switch (spec.kind) {
    case MissingKind::none:
      os << "none";
      break;
    case MissingKind::mcar:
      os << "mcar(" << spec.rate << ")";
      break;
    case MissingKind::mar:
      os << "mar(rate=" << spec.rate << ",rho=" << spec.rho << ",slope=" << spec.slope << ")";
      break;
  }
  return os.str();
}

void
SimulationConfig::validate() const
{
  if (n < 2)
    throw DomainError("simulation needs n >= 2");
  if (replications < 1)
    throw DomainError("simulation needs at least one replication");
  if (grid_points < 2)
    throw DomainError("simulation grid needs at least two points");
}

std::uint64_t
splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t
replication_seed(std::uint64_t seed, std::uint64_t rep)
{
  return splitmix64(splitmix64(seed) + rep);
}

std::vector<Observation>
sample_replication(const SimulationConfig& config, std::uint64_t rep)
{
  config.validate();
  std::mt19937_64 rng(replication_seed(config.seed, rep));
  const auto& miss = config.missing;
  const double s = std::sqrt(1.0 - miss.rho * miss.rho);

  std::vector<Observation> data;
  data.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const double t = config.distribution.sample(rng);
    std::optional<double> aux;
    if (miss.kind == MissingKind::mar)
      aux = miss.rho * t + s * standard_normal(rng);
    bool seen = true;
    if (miss.kind != MissingKind::none)
      seen = uniform_open(rng) < miss.observe_probability(aux);
    data.push_back(seen ? Observation::observed(t, aux) : Observation::missing(t, aux));
  }
  return data;
}

PropensityModel
oracle_propensity(const MissingnessSpec& spec)
{
  if (spec.kind != MissingKind::mar)
    return PropensityModel::known(spec.observe_probability(std::nullopt));
  return PropensityModel::known([spec](const Observation& o) { return spec.observe_probability(o.aux); });
}

EvaluationGrid
replication_grid(const SimulationConfig& config, std::span<const Observation> data)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& o : data) {
    if (!o.is_observed())
      continue;
    lo = std::min(lo, o.x);
    hi = std::max(hi, o.x);
  }
  if (std::holds_alternative<CauchySpec>(config.distribution.spec())) {
    lo = std::max(lo, config.distribution.quantile(0.0025));
    hi = std::min(hi, config.distribution.quantile(0.9975));
  }
  if (!(hi > lo))
    throw DegenerateDataError("replication has fewer than two distinct observed values");
  return EvaluationGrid::uniform(lo, hi, config.grid_points);
}

} // namespace rkde
