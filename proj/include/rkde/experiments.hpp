#pragma once

#include "rkde/estimators.hpp"
#include "rkde/metrics.hpp"
#include "rkde/simulate.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rkde {

//! Runs fn(i) for i in [0, count) on `threads` workers. Results must be
//! written by index; the first exception is rethrown after all workers stop.
void
parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct EstimatorSpec
{
  std::string label;
  EstimatorKind kind = EstimatorKind::recursive;
  double gamma0 = 1.0;

  static EstimatorSpec nonrecursive();
  //! "recursive1" for gamma0 = 1, "recursive2" for gamma0 = 0.8.
  static EstimatorSpec recursive(double gamma0);
};

//! One cell of a simulation table: a design crossed with one estimator.
struct CellDesign
{
  std::string table;
  Distribution distribution = Distribution::normal();
  MissingnessSpec missing;
  std::size_t n = 100;
  std::size_t replications = 500;
  std::size_t grid_points = 500;
  std::uint64_t seed = 20170101;
  EstimatorSpec estimator = EstimatorSpec::recursive(1.0);
  //! Points where squared errors are recorded.
  std::vector<double> x0;
  //! Local designs estimate f(x0) with the local plug-in bandwidth and skip
  //! the grid.
  bool local = false;

  SimulationConfig simulation() const;
};

ReplicationReport
run_replication(const CellDesign& design, std::size_t rep);

struct CellResult
{
  CellSummary summary;
  std::vector<ReplicationReport> reports;
};

//! Replications run in parallel; aggregation follows replication order, so
//! the numbers do not depend on `threads`.
CellResult
run_cell(const CellDesign& design, std::size_t threads);

struct TableOverrides
{
  std::optional<std::vector<std::size_t>> n;
  //! Missing fractions in [0, 1).
  std::optional<std::vector<double>> missing;
  std::optional<std::vector<double>> rho;
  std::optional<std::size_t> replications;
  std::uint64_t seed = 20170101;
  std::optional<std::size_t> grid_points;
  //! Restricts the recursive estimators to this gamma0.
  std::optional<double> gamma0;
  //! "recursive", "batch" or "both".
  std::string estimator = "both";
};

//! Cells of table 1..5 with the overrides applied. Throws DomainError for an
//! unknown table or invalid override.
std::vector<CellDesign>
table_designs(int table, const TableOverrides& overrides = {});

struct TimingConfig
{
  Distribution distribution = Distribution::normal();
  MissingnessSpec missing;
  std::size_t n = 500;
  std::size_t grid_points = 500;
  std::size_t repetitions = 20;
  double n1_fraction = 0.5;
  std::uint64_t seed = 20170101;
};

struct TimingResult
{
  std::size_t n = 0;
  std::size_t n1 = 0;
  std::size_t grid_points = 0;
  std::size_t repetitions = 0;
  //! Medians over repetitions.
  double recursive_resume_seconds = 0.0;
  double recursive_build_seconds = 0.0;
  double batch_recompute_seconds = 0.0;
  //! batch_recompute / recursive_resume.
  double ratio = 0.0;
  //! Phases of building the recursive state on the first n1 observations.
  PhaseSeconds recursive_build_phases;
  PhaseSeconds batch_phases;
  //! Grid-kernel evaluations performed by one resume.
  std::uint64_t resume_grid_evaluations = 0;
};

//! Resume-versus-recompute benchmark. The recursive state is built on the
//! first floor(n1_fraction * n) observations and then resumed over the tail;
//! the batch path redoes propensity, plug-in and the full KDE at n.
//! Repetitions interleave the two paths.
TimingResult
timing_benchmark(const TimingConfig& config);

} // namespace rkde
