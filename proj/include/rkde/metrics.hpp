#pragma once

#include "rkde/density.hpp"
#include "rkde/estimators.hpp"
#include "rkde/simulate.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rkde {

//! Weighted integrated squared error: trapezoid rule for (fhat - f)^2 f over
//! the estimate's grid.
double
wise(const DensityEstimate& estimate, const Distribution& truth);

//! Same integrand on arbitrary grid values.
double
wise(const EvaluationGrid& grid, std::span<const double> values, const Distribution& truth);

struct MseResult
{
  double mse = 0.0;
  //! sqrt(mse) / f(x0).
  double relative_root = 0.0;
};

//! Mean squared deviation of replicated estimates of f(x0). Throws
//! DomainError when f(x0) = 0 or there are no estimates.
MseResult
mse_at(std::span<const double> estimates, double x0, const Distribution& truth);

struct BiasVariance
{
  double mean = 0.0;
  double bias = 0.0;
  //! Sample variance (n - 1 denominator).
  double variance = 0.0;
  std::size_t replications = 0;
};

inline constexpr std::size_t min_decomposition_replications = 100;

//! Throws PrecisionError with fewer than 100 replications.
BiasVariance
bias_variance_decomposition(std::span<const double> estimates, double truth);

struct CltReport
{
  std::size_t replications = 0;
  double mean = 0.0;
  double variance = 0.0;
  //! Standardized third moment of the replicates.
  double skewness = 0.0;
  //! Standardized fourth moment (3 for a normal law).
  double kurtosis = 0.0;
  //! scale^2 * variance / predicted_variance.
  double variance_ratio = 0.0;
  //! False below 1000 replications; the numbers are still reported.
  bool adequate = false;
};

//! `scale` is the normalization sqrt(gamma_n^-1 pi h_n) and
//! `predicted_variance` the limit variance of the normalized estimate.
CltReport
clt_diagnostics(std::span<const double> estimates, double scale, double predicted_variance);

//! One replication of one estimator.
struct ReplicationReport
{
  std::size_t rep = 0;
  double wise = 0.0;
  //! Squared error at each named point, in the cell's point order.
  std::vector<double> squared_errors;
  //! Estimate at each named point.
  std::vector<double> point_estimates;
  //! Bandwidth at each named point (local designs) or the global h_n.
  std::vector<double> bandwidths;
  double seconds = 0.0;
  EstimatorKind kind = EstimatorKind::recursive;
  double bandwidth = 0.0;
  double pi_hat = 1.0;
};

struct PointSummary
{
  double x0 = 0.0;
  double mse = 0.0;
  double mse_se = 0.0;
  double relative_root = 0.0;
  double mean_bandwidth = 0.0;
};

struct CellSummary
{
  std::string table;
  std::string estimator;
  std::string distribution;
  std::string missing;
  std::size_t n = 0;
  double missing_percent = 0.0;
  std::optional<double> rho;
  std::size_t replications = 0;
  double mwise = 0.0;
  double mwise_se = 0.0;
  double mean_bandwidth = 0.0;
  double mean_pi_hat = 0.0;
  std::vector<PointSummary> points;
  double total_cpu_seconds = 0.0;
};

//! Folds reports in replication-index order. `truth_at` holds f(x0) for each
//! named point; `x0` the points themselves.
CellSummary
summarize(std::span<const ReplicationReport> reports,
          std::span<const double> x0,
          std::span<const double> truth_at);

//! Numeric fields only; timing is left out so the document is reproducible.
nlohmann::json
to_json(const CellSummary& cell);

//! Header matching csv_row.
std::string
csv_header(bool local, bool with_timing = false);

//! estimator,n,missing%,MWISE,CPU-seconds columns (plus the point columns for
//! local designs). CPU seconds are omitted when `with_timing` is false.
std::string
csv_row(const CellSummary& cell, bool local, bool with_timing = false);

} // namespace rkde
