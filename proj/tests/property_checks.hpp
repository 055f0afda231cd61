#pragma once

// Randomized property checks shared by the unit suite and the acceptance
// binary.

#include "rkde/density.hpp"
#include "rkde/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace rkde::props {

inline double
gauss(double u)
{
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
}

struct ReductionOutcome
{
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;
};

inline std::vector<Observation>
random_complete_sample(std::mt19937_64& rng, std::size_t n)
{
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const double scale = u(rng);
  std::vector<Observation> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(Observation::observed(scale * z(rng)));
  return out;
}

// Complete data with unit propensities against the unweighted recursive and
// batch estimators written out directly. Every tenth case runs the full
// plug-in pipeline and compares against the classical form at the chosen
// bandwidth.
inline ReductionOutcome
complete_data_reduction(std::size_t cases, std::uint64_t seed, double tolerance = 1e-14)
{
  ReductionOutcome out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(20, 200);
  std::uniform_real_distribution<double> coeff(0.2, 2.0);
  std::uniform_int_distribution<int> gamma_pick(0, 1);
  auto record = [&](double got, double want) {
    const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
    out.worst = std::max(out.worst, err);
    if (err > tolerance)
      ++out.failures;
  };

  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    const std::size_t n = size(rng);
    const auto data = random_complete_sample(rng, n);
    const auto grid = EvaluationGrid::uniform(-4.0, 4.0, 41);
    const double gamma0 = gamma_pick(rng) ? 1.0 : 0.8;
    const double c0 = coeff(rng);
    const double hb = coeff(rng) * 0.3;
    const std::vector<double> ones(n, 1.0);

    RecursiveKde kde(grid, StepsizeSchedule(gamma0), BandwidthSchedule(c0, 0.2));
    for (const auto& o : data)
      kde.update(o, 1.0);
    const auto batch = batch_ht_kde(data, hb, ones, grid);

    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.points()[i];
      double f = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double g = std::min(1.0, gamma0 / static_cast<double>(k));
        const double h = c0 * std::pow(static_cast<double>(k), -0.2);
        f = (1.0 - g) * f + g / h * gauss((x - data[k - 1].x) / h);
      }
      record(kde.values()[i], f);

      double s = 0.0;
      for (const auto& o : data)
        s += gauss((x - o.x) / hb);
      record(batch.values[i], s / (static_cast<double>(n) * hb));
    }

    if (c % 10 == 0) {
      RecursiveOptions ro;
      ro.gamma0 = gamma0;
      const auto plan = plan_recursive(data, ro);
      const auto fit = fit_recursive(data, grid, ro);
      const auto bplan = plan_batch(data);
      const auto bfit = fit_batch(data, grid);
      record(plan.propensity.scalar, 1.0);
      record(bplan.propensity.scalar, 1.0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.points()[i];
        double f = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          const double g = std::min(1.0, gamma0 / static_cast<double>(k));
          const double h = plan.bandwidth(k);
          f = (1.0 - g) * f + g / h * gauss((x - data[k - 1].x) / h);
        }
        record(fit.estimate.values[i], f);
        double s = 0.0;
        for (const auto& o : data)
          s += gauss((x - o.x) / bplan.bandwidth);
        record(bfit.estimate.values[i], s / (static_cast<double>(n) * bplan.bandwidth));
      }
    }
  }
  return out;
}

struct ResumeOutcome
{
  std::size_t cases = 0;
  std::size_t mismatches = 0;
};

// Resume from n1 = n / 2 against a full sequential replay, compared bit for
// bit, over random sizes, schedules, grids and missingness.
inline ResumeOutcome
resume_exactness(std::size_t cases, std::uint64_t seed)
{
  ResumeOutcome out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 400);
  std::uniform_int_distribution<std::size_t> points(2, 300);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> z;
  for (std::size_t c = 0; c < cases; ++c) {
    ++out.cases;
    const std::size_t n = size(rng);
    const double missing = 0.7 * unit(rng);
    std::vector<Observation> data;
    std::vector<double> pis;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = 2.0 * z(rng);
      if (unit(rng) < missing)
        data.push_back(Observation::missing(x));
      else
        data.push_back(Observation::observed(x));
      pis.push_back(0.3 + 0.7 * unit(rng));
    }
    const double gamma0 = 0.5 + unit(rng);
    const double c0 = 0.2 + 2.0 * unit(rng);
    const auto grid = EvaluationGrid::uniform(-6.0, 6.0 * (0.5 + unit(rng)), points(rng));
    std::size_t at = 0;
    PropensityScorer scorer = [&](const Observation&) { return pis[at++ % n]; };

    at = 0;
    RecursiveKde full(grid, StepsizeSchedule(gamma0), BandwidthSchedule(c0, 0.2), scorer);
    for (const auto& o : data)
      full.update(o);

    at = 0;
    RecursiveKde head(grid, StepsizeSchedule(gamma0), BandwidthSchedule(c0, 0.2), scorer);
    const std::size_t n1 = n / 2;
    for (std::size_t i = 0; i < n1; ++i)
      head.update(data[i]);
    const auto resumed = resume(head, std::span<const Observation>(data).subspan(n1));

    bool same = resumed.count() == full.count();
    for (std::size_t i = 0; same && i < grid.size(); ++i)
      same = resumed.values()[i] == full.values()[i];
    if (!same)
      ++out.mismatches;
  }
  return out;
}

} // namespace rkde::props
