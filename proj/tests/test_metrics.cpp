#include "rkde/errors.hpp"
#include "rkde/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace rkde;

TEST_CASE("wise")
{
  const auto truth = Distribution::normal();
  const auto grid = EvaluationGrid::uniform(-8.0, 8.0, 1601);
  std::vector<double> exact;
  for (double x : grid.points())
    exact.push_back(truth.density(x));
  CHECK(wise(grid, exact, truth) == 0.0);

  std::vector<double> shifted = exact;
  for (auto& v : shifted)
    v += 0.01;
  CHECK(wise(grid, shifted, truth) == doctest::Approx(1e-4).epsilon(1e-6));

  // Direct trapezoid on a three-point grid.
  const auto small = EvaluationGrid::uniform(-1.0, 1.0, 3);
  const std::vector<double> v{ 0.0, 0.0, 0.0 };
  const double f0 = truth.density(0.0);
  const double f1 = truth.density(1.0);
  const double expected = 1.0 * (0.5 * f1 * f1 * f1 + f0 * f0 * f0 + 0.5 * f1 * f1 * f1);
  CHECK(wise(small, v, truth) == doctest::Approx(expected).epsilon(1e-14));

  const DensityEstimate e{ small, v, {} };
  CHECK(wise(e, truth) == wise(small, v, truth));
}

TEST_CASE("wise is stable under grid refinement")
{
  const auto truth = Distribution::normal();
  auto estimate = [](double x) { return std::exp(-x * x / 2.4) / std::sqrt(2.4 * M_PI); };
  auto at = [&](std::size_t m) {
    const auto g = EvaluationGrid::uniform(-5.0, 5.0, m);
    std::vector<double> v;
    for (double x : g.points())
      v.push_back(estimate(x));
    return wise(g, v, truth);
  };
  CHECK(std::abs(at(1000) / at(500) - 1.0) < 0.01);
  CHECK(std::abs(at(4000) / at(500) - 1.0) < 0.01);
}

TEST_CASE("mse_at")
{
  const auto truth = Distribution::normal();
  const double f0 = truth.density(0.0);
  CHECK(mse_at(std::vector<double>{ f0, f0, f0 }, 0.0, truth).mse == 0.0);
  const auto one = mse_at(std::vector<double>{ f0 + 0.1 }, 0.0, truth);
  CHECK(one.mse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(one.relative_root == doctest::Approx(0.1 / f0).epsilon(1e-12));
  const auto two = mse_at(std::vector<double>{ f0 + 0.1, f0 - 0.3 }, 0.0, truth);
  CHECK(two.mse == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS(mse_at(std::vector<double>{ 0.1, 0.2 }, -1.0, Distribution::exponential(1.0)), DomainError);
  CHECK_THROWS_AS(mse_at(std::vector<double>{}, 0.0, truth), DomainError);
}

TEST_CASE("bias and variance decomposition")
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> est;
  for (int i = 0; i < 5000; ++i)
    est.push_back(2.0 + noise(rng));
  const auto bv = bias_variance_decomposition(est, 2.0);
  CHECK(std::abs(bv.bias) < 4.0 * 0.1 / std::sqrt(5000.0));
  CHECK(bv.variance == doctest::Approx(0.01).epsilon(0.05));
  CHECK(bv.replications == 5000);

  const std::vector<double> few(99, 1.0);
  CHECK_THROWS_AS(bias_variance_decomposition(few, 1.0), PrecisionError);

  std::vector<double> exact{ 1.0, 3.0 };
  exact.resize(100, 2.0);
  const auto d = bias_variance_decomposition(exact, 1.5);
  CHECK(d.mean == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(d.bias == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.variance == doctest::Approx(2.0 / 99.0).epsilon(1e-12));
}

TEST_CASE("CLT diagnostics on injected normals")
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(1.0, 0.5);
  std::vector<double> s;
  for (int i = 0; i < 20000; ++i)
    s.push_back(z(rng));
  const auto r = clt_diagnostics(s, 2.0, 1.0);
  CHECK(r.adequate);
  CHECK(std::abs(r.skewness) < 0.1);
  CHECK(std::abs(r.kurtosis - 3.0) < 0.15);
  CHECK(r.variance_ratio == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(r.mean - 1.0) < 0.02);

  const auto small = clt_diagnostics(std::vector<double>(s.begin(), s.begin() + 100), 2.0, 1.0);
  CHECK_FALSE(small.adequate);
  CHECK(small.replications == 100);
}

TEST_CASE("summaries fold in replication order")
{
  std::vector<ReplicationReport> reports;
  for (std::size_t r = 0; r < 4; ++r) {
    ReplicationReport rep;
    rep.rep = r;
    rep.wise = 0.1 * static_cast<double>(r + 1);
    rep.squared_errors = { 0.01 * static_cast<double>(r) };
    rep.point_estimates = { 0.4 };
    rep.bandwidths = { 0.5 };
    rep.bandwidth = 0.3;
    rep.pi_hat = 0.7;
    rep.seconds = 0.25;
    reports.push_back(rep);
  }
  const std::vector<double> x0{ 0.0 };
  const std::vector<double> truth{ 0.4 };
  const auto cell = summarize(reports, x0, truth);
  CHECK(cell.replications == 4);
  CHECK(cell.mwise == doctest::Approx(0.25).epsilon(1e-14));
  // sd of {0.1, 0.2, 0.3, 0.4} over sqrt(4).
  CHECK(cell.mwise_se == doctest::Approx(std::sqrt(0.05 / 3.0) / 2.0).epsilon(1e-12));
  CHECK(cell.mean_bandwidth == doctest::Approx(0.3));
  CHECK(cell.mean_pi_hat == doctest::Approx(0.7));
  CHECK(cell.total_cpu_seconds == 1.0);
  REQUIRE(cell.points.size() == 1);
  CHECK(cell.points[0].mse == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(cell.points[0].relative_root == doctest::Approx(std::sqrt(0.015) / 0.4).epsilon(1e-14));
  CHECK(cell.points[0].mean_bandwidth == 0.5);

  CHECK_THROWS_AS(summarize(std::vector<ReplicationReport>{}, x0, truth), DomainError);
}

TEST_CASE("csv and json layout")
{
  CellSummary cell;
  cell.table = "1";
  cell.estimator = "recursive1";
  cell.distribution = "normal(0,1)";
  cell.n = 500;
  cell.missing_percent = 30.0;
  cell.replications = 500;
  cell.mwise = 0.0012;
  cell.mwise_se = 1e-4;
  cell.mean_bandwidth = 0.3;
  cell.mean_pi_hat = 0.7;
  cell.total_cpu_seconds = 12.5;
  CHECK(csv_header(false) == "table,distribution,estimator,n,missing%,rho,replications,MWISE,MWISE_se,bandwidth,pi_hat");
  CHECK(csv_row(cell, false) == "1,\"normal(0,1)\",recursive1,500,30,,500,0.0012,0.0001,0.3,0.7\n");
  CHECK(csv_header(false, true).ends_with(",CPU-seconds"));
  CHECK(csv_row(cell, false, true).ends_with(",12.5\n"));

  cell.points = { { 0.0, 1e-4, 1e-5, 0.025, 0.4 }, { 1.0, 2e-4, 2e-5, 0.05, 0.5 } };
  CHECK(csv_header(true) == "table,distribution,estimator,n,missing%,rho,replications,x0,bandwidth,relative_root_mse,mse,mse_se");
  const auto rows = csv_row(cell, true);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 2);

  const auto j = to_json(cell);
  CHECK(j["mwise"] == 0.0012);
  CHECK(j["rho"].is_null());
  CHECK(j["points"].size() == 2);
  CHECK_FALSE(j.contains("total_cpu_seconds"));
}
