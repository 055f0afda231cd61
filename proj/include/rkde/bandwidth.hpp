#pragma once

#include "rkde/density.hpp"
#include "rkde/kernels.hpp"
#include "rkde/propensity.hpp"

#include <optional>
#include <span>
#include <vector>

namespace rkde {

//! Floor applied to estimated density functionals before any fifth root.
inline constexpr double functional_floor = 1e-6;

//! Pilot exponents for the I1 / f(x) pilots, the I2 / f''(x) pilots and the
//! propensity smoother.
inline constexpr double pilot_exponent_i1 = 2.0 / 5.0;
inline constexpr double pilot_exponent_i2 = 3.0 / 14.0;
inline constexpr double pilot_exponent_propensity = 1.0 / 5.0;

//! Values of the observed (delta = 1) items, in stream order.
std::vector<double>
observed_values(std::span<const Observation> data);

//! min{sample standard deviation, (Q3 - Q1) / 1.349}. Quartiles use linear
//! interpolation between order statistics. Throws DomainError for fewer
//! than 2 values and DegenerateDataError for zero spread.
double
pilot_spread(std::span<const double> values);

//! n^(-beta) * pilot_spread(values).
double
pilot_bandwidth(std::span<const double> observed, double beta, std::size_t n);

enum class FunctionalMethod
{
  recursive,
  batch
};

const char* to_string(FunctionalMethod method);

struct FunctionalEstimates
{
  double i1 = 0.0;
  double i2 = 0.0;
  FunctionalMethod method = FunctionalMethod::recursive;
  bool i1_floored = false;
  bool i2_floored = false;
};

// All estimators below weight the outer average over i by delta_i / pi_i,
// i.e. they average the pilot over the observed items with Horvitz-Thompson
// weights; with complete data this is the plain mean over i.

//! Recursive estimate of I1 = int f^2: the pilot density
//!   f^(x) = sum_k w_k (delta_k / pi_k) b_k^-1 K((x - X_k) / b_k)
//! with gains 1.36/k and bandwidths b_k = spread * k^(-2/5), averaged at the
//! sample points. O(n^2).
double
estimate_i1_recursive_raw(std::span<const Observation> data,
                          std::span<const double> inverse_weights,
                          double spread,
                          Kernel kernel = Kernel{});

//! Recursive estimate of I2 = int (f'')^2 f with the j != k restriction,
//! computed as S(X_i)^2 minus the diagonal, where S is the recursive K''
//! pilot with gains 1.48/k and bandwidths spread * k^(-3/14). O(n^2).
double
estimate_i2_recursive_raw(std::span<const Observation> data,
                          std::span<const double> inverse_weights,
                          double spread,
                          Kernel kernel = Kernel{});

//! Leave-one-out double sum 1/(n(n-1)b) sum_{i != j} ... K((X_i - X_j)/b).
double
estimate_i1_batch_raw(std::span<const Observation> data,
                      std::span<const double> inverse_weights,
                      double b,
                      Kernel kernel = Kernel{});

//! Triple sum 1/(n^3 b'^6) sum_i sum_{j != k} K''(.)K''(.), factored to O(n^2).
double
estimate_i2_batch_raw(std::span<const Observation> data,
                      std::span<const double> inverse_weights,
                      double b_prime,
                      Kernel kernel = Kernel{});

// Floored convenience forms; pilots follow the default rule.
double
estimate_i1_recursive(std::span<const Observation> data, const FittedPropensity& propensity);
double
estimate_i2_recursive(std::span<const Observation> data, const FittedPropensity& propensity);
double
estimate_i1_batch(std::span<const Observation> data, const FittedPropensity& propensity, double b);
double
estimate_i2_batch(std::span<const Observation> data, const FittedPropensity& propensity, double b_prime);

//! Both functionals with default pilots and flooring recorded.
FunctionalEstimates
estimate_functionals(std::span<const Observation> data,
                     const FittedPropensity& propensity,
                     FunctionalMethod method,
                     Kernel kernel = Kernel{});

//! 2^(-1/5) (gamma0 - 2/5)^(1/5) (i1/i2)^(1/5) (R(K)/mu2^2)^(1/5).
//! Requires gamma0 > 2/5.
double
global_bandwidth_coefficient(double i1, double i2, const KernelConstants& constants, double gamma0);

//! (i1/i2)^(1/5) (R(K)/mu2^2)^(1/5).
double
batch_bandwidth_coefficient(double i1, double i2, const KernelConstants& constants);

//! coefficient * pi_hat^(-1/5) * n^(-1/5).
double
plug_in_bandwidth(double coefficient, double pi_hat, std::size_t n);

//! Leading constant 2^(-1/5) (gamma0 - 2/5)^(1/5) of the global recursive
//! bandwidth; (3/10)^(1/5) at gamma0 = 1 and 5^(-1/5) at gamma0 = 4/5.
double
recursive_bandwidth_constant(double gamma0);

//! Local MSE-optimal bandwidth
//!   c (f / f2^2)^(1/5) (R(K)/mu2^2)^(1/5) pi_hat^(-1/5) n^(-1/5)
//! with c = (3/10)^(1/5) for `recursive` and 1 for `batch`.
//! Throws InflectionFallbackError (carrying `fallback`) when
//! |f2_hat| < curvature_eps, DomainError when f_hat <= 0.
double
local_bandwidth(double f_hat,
                double f2_hat,
                const KernelConstants& constants,
                double pi_hat,
                std::size_t n,
                EstimatorKind kind,
                double fallback = 0.0,
                double curvature_eps = 1e-8);

//! Which asymptotic MWISE: recursive with stepsize gamma0/n, or batch.
struct AmwiseKind
{
  EstimatorKind estimator = EstimatorKind::batch;
  double gamma0 = 1.0;

  static AmwiseKind batch() { return { EstimatorKind::batch, 1.0 }; }
  static AmwiseKind recursive(double gamma0) { return { EstimatorKind::recursive, gamma0 }; }
};

//! 5/4 for batch; (5/4) 2^(-4/5) gamma0^2 (gamma0 - 2/5)^(-6/5) for recursive.
double
amwise_leading_constant(AmwiseKind kind);

//! leading constant * i1^(4/5) i2^(1/5) Theta(K) pi_hat^(-4/5) n^(-4/5).
double
plug_in_amwise(double i1,
               double i2,
               const KernelConstants& constants,
               double pi_hat,
               std::size_t n,
               AmwiseKind kind);

} // namespace rkde
