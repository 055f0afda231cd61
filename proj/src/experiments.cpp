#include "rkde/experiments.hpp"

#include "rkde/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace rkde {

void
parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::atomic<bool> failed{ false };
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count || failed.load())
            return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
              error = std::current_exception();
            failed = true;
          }
        }
      });
  }
  if (error)
    std::rethrow_exception(error);
}

EstimatorSpec
EstimatorSpec::nonrecursive()
{
  return { "nonrecursive", EstimatorKind::batch, 1.0 };
}

EstimatorSpec
EstimatorSpec::recursive(double gamma0)
{
  std::string label = gamma0 == 1.0 ? "recursive1" : gamma0 == 0.8 ? "recursive2" : fmt::format("recursive({})", gamma0);
  return { std::move(label), EstimatorKind::recursive, gamma0 };
}

SimulationConfig
CellDesign::simulation() const
{
  SimulationConfig c;
  c.distribution = distribution;
  c.missing = missing;
  c.n = n;
  c.replications = replications;
  c.grid_points = grid_points;
  c.seed = seed;
  return c;
}

ReplicationReport
run_replication(const CellDesign& design, std::size_t rep)
{
  const auto config = design.simulation();
  const auto data = sample_replication(config, rep);

  ReplicationReport r;
  r.rep = rep;
  r.kind = design.estimator.kind;

  if (design.local) {
    const auto start = std::chrono::steady_clock::now();
    for (double x0 : design.x0) {
      LocalEstimate est;
      if (design.estimator.kind == EstimatorKind::recursive) {
        RecursiveOptions opts;
        opts.gamma0 = design.estimator.gamma0;
        est = local_recursive_estimate(data, x0, opts);
      } else {
        est = local_batch_estimate(data, x0);
      }
      const double err = est.value - design.distribution.density(x0);
      r.point_estimates.push_back(est.value);
      r.squared_errors.push_back(err * err);
      r.bandwidths.push_back(est.bandwidth);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.bandwidth = r.bandwidths.empty() ? 0.0 : r.bandwidths.front();
    r.pi_hat = empirical_proportion(data);
    return r;
  }

  const auto grid = replication_grid(config, data);
  FitResult fit = [&] {
    if (design.estimator.kind == EstimatorKind::recursive) {
      RecursiveOptions opts;
      opts.gamma0 = design.estimator.gamma0;
      return fit_recursive(data, grid, opts);
    }
    return fit_batch(data, grid);
  }();
  r.wise = wise(fit.estimate, design.distribution);
  r.seconds = fit.seconds.total();
  r.bandwidth = fit.estimate.meta.bandwidth;
  r.pi_hat = fit.estimate.meta.pi_hat;
  for (double x0 : design.x0) {
    const double v = fit.estimate.at(x0);
    const double err = v - design.distribution.density(x0);
    r.point_estimates.push_back(v);
    r.squared_errors.push_back(err * err);
  }
  return r;
}

CellResult
run_cell(const CellDesign& design, std::size_t threads)
{
  design.simulation().validate();
  CellResult out;
  out.reports.resize(design.replications);
  parallel_for(design.replications, threads, [&](std::size_t rep) { out.reports[rep] = run_replication(design, rep); });

  std::vector<double> truth;
  for (double x : design.x0)
    truth.push_back(design.distribution.density(x));
  out.summary = summarize(out.reports, design.x0, truth);
  out.summary.table = design.table;
  out.summary.estimator = design.estimator.label;
  out.summary.distribution = design.distribution.name();
  out.summary.missing = to_string(design.missing);
  out.summary.n = design.n;
  out.summary.missing_percent = 100.0 * design.missing.rate;
  if (design.missing.kind == MissingKind::mar)
    out.summary.rho = design.missing.rho;
  return out;
}

namespace {

std::vector<EstimatorSpec>
estimator_set(const TableOverrides& o, bool local)
{
  if (o.estimator != "both" && o.estimator != "recursive" && o.estimator != "batch")
    throw DomainError("estimator must be recursive, batch or both");
  std::vector<double> gammas = local ? std::vector<double>{ 1.0 } : std::vector<double>{ 1.0, 0.8 };
  if (o.gamma0) {
    if (!(*o.gamma0 > 0.4))
      throw DomainError("gamma0 must exceed 2/5");
    gammas = { *o.gamma0 };
  }
  std::vector<EstimatorSpec> out;
  if (o.estimator != "recursive")
    out.push_back(EstimatorSpec::nonrecursive());
  if (o.estimator != "batch")
    for (double g : gammas)
      out.push_back(EstimatorSpec::recursive(g));
  return out;
}

void
check_sizes(const std::vector<std::size_t>& ns)
{
  if (ns.empty())
    throw DomainError("at least one sample size required");
  for (auto n : ns)
    if (n < 10)
      throw DomainError("sample sizes must be at least 10");
}

void
check_rates(const std::vector<double>& rates, bool allow_zero)
{
  if (rates.empty())
    throw DomainError("at least one missing rate required");
  for (double p : rates)
    if (!(p >= 0.0 && p < 1.0) || (!allow_zero && p == 0.0))
      throw DomainError("missing rates must lie in [0, 1), and in (0, 1) under MAR");
}

Distribution
table_distribution(int table)
{
  switch (table) {
    case 1:
      return Distribution::normal();
    case 2:
      return Distribution::mixture(0.5, { 2.0, 1.0 }, { -3.0, 1.0 });
    default:
      return Distribution::weibull(2.0, 1.0);
  }
}

struct LocalTarget
{
  Distribution distribution;
  std::vector<double> x0;
};

std::vector<LocalTarget>
local_targets()
{
  const double s = 1.0 / std::numbers::sqrt2;
  return {
    { Distribution::mixture(0.5, { -1.0, s }, { 1.0, s }), { 0.0 } },
    { Distribution::mixture(0.5, { -1.0, 1.0 }, { 1.0, 1.0 }), { 0.0 } },
    { Distribution::normal(), { -1.282, 0.0, 1.282 } },
    { Distribution::exponential(1.0), { 0.1054, 0.693, 2.303 } },
    { Distribution::cauchy(), { -3.078, 0.0, 3.078 } },
  };
}

} // namespace

std::vector<CellDesign>
table_designs(int table, const TableOverrides& o)
{
  if (table < 1 || table > 5)
    throw DomainError("table must be 1, 2, 3, 4 or 5");
  if (o.replications && *o.replications < 1)
    throw DomainError("replications must be at least 1");
  if (o.grid_points && *o.grid_points < 2)
    throw DomainError("grid needs at least two points");

  const bool local = table == 5;
  const auto estimators = estimator_set(o, local);
  const std::size_t grid = o.grid_points.value_or(500);
  std::vector<CellDesign> cells;

  auto make = [&](const Distribution& dist, const MissingnessSpec& miss, std::size_t n, const EstimatorSpec& est) {
    CellDesign d;
    d.table = fmt::format("table{}", table);
    d.distribution = dist;
    d.missing = miss;
    d.n = n;
    d.grid_points = grid;
    d.seed = o.seed;
    d.estimator = est;
    d.local = local;
    return d;
  };

  if (table <= 3) {
    const auto ns = o.n.value_or(std::vector<std::size_t>{ 100, 200, 500 });
    const auto rates = o.missing.value_or(std::vector<double>{ 0.0, 0.3, 0.5, 0.7 });
    check_sizes(ns);
    check_rates(rates, true);
    const auto dist = table_distribution(table);
    for (double p : rates)
      for (const auto& est : estimators)
        for (auto n : ns) {
          auto d = make(dist, MissingnessSpec::mcar(p), n, est);
          d.replications = o.replications.value_or(500);
          cells.push_back(std::move(d));
        }
    return cells;
  }

  if (table == 4) {
    const auto ns = o.n.value_or(std::vector<std::size_t>{ 100, 200, 500 });
    const auto rates = o.missing.value_or(std::vector<double>{ 0.7 });
    const auto rhos = o.rho.value_or(std::vector<double>{ 0.3, 0.5, 0.8 });
    check_sizes(ns);
    check_rates(rates, false);
    for (double r : rhos)
      if (!(r > -1.0 && r < 1.0))
        throw DomainError("rho must lie in (-1, 1)");
    for (int t = 1; t <= 3; ++t) {
      const auto dist = table_distribution(t);
      for (double p : rates)
        for (double r : rhos) {
          const auto miss = MissingnessSpec::mar(p, r, dist);
          for (const auto& est : estimators)
            for (auto n : ns) {
              auto d = make(dist, miss, n, est);
              d.replications = o.replications.value_or(500);
              cells.push_back(std::move(d));
            }
        }
    }
    return cells;
  }

  const auto ns = o.n.value_or(std::vector<std::size_t>{ 100, 1000 });
  const auto rates = o.missing.value_or(std::vector<double>{ 0.0 });
  check_sizes(ns);
  check_rates(rates, true);
  for (const auto& target : local_targets())
    for (double p : rates)
      for (auto n : ns)
        for (const auto& est : estimators) {
          auto d = make(target.distribution, MissingnessSpec::mcar(p), n, est);
          d.replications = o.replications.value_or(200);
          d.x0 = target.x0;
          cells.push_back(std::move(d));
        }
  return cells;
}

namespace {

double
median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

PhaseSeconds
median_phases(const std::vector<PhaseSeconds>& v)
{
  std::vector<double> a, b, c;
  for (const auto& p : v) {
    a.push_back(p.pilot);
    b.push_back(p.plug_in);
    c.push_back(p.main);
  }
  return { median(a), median(b), median(c) };
}

} // namespace

TimingResult
timing_benchmark(const TimingConfig& config)
{
  if (config.n < 4)
    throw DomainError("timing benchmark needs n >= 4");
  if (config.repetitions < 1)
    throw DomainError("timing benchmark needs at least one repetition");
  if (!(config.n1_fraction > 0.0 && config.n1_fraction <= 1.0))
    throw DomainError("n1 fraction must lie in (0, 1]");

  SimulationConfig sim;
  sim.distribution = config.distribution;
  sim.missing = config.missing;
  sim.n = config.n;
  sim.grid_points = config.grid_points;
  sim.seed = config.seed;
  const auto data = sample_replication(sim, 0);
  const auto grid = replication_grid(sim, data);
  const auto n1 = std::max<std::size_t>(
    2, static_cast<std::size_t>(std::floor(config.n1_fraction * static_cast<double>(config.n))));
  const std::span<const Observation> all(data);
  const auto head = all.first(n1);
  const auto tail = all.subspan(n1);

  using clock = std::chrono::steady_clock;
  std::vector<double> resume_t, build_t, batch_t;
  std::vector<PhaseSeconds> build_phases, batch_phases;
  std::uint64_t evaluations = 0;
  double sink = 0.0;

  for (std::size_t r = 0; r < config.repetitions; ++r) {
    {
      auto start = clock::now();
      auto plan = plan_recursive(head);
      auto main_start = clock::now();
      auto state = make_recursive_state(plan, grid);
      for (const auto& obs : head)
        state.update(obs);
      plan.seconds.main = std::chrono::duration<double>(clock::now() - main_start).count();
      build_t.push_back(std::chrono::duration<double>(clock::now() - start).count());
      build_phases.push_back(plan.seconds);

      const auto before = state.grid_updates();
      start = clock::now();
      state = resume(std::move(state), tail);
      resume_t.push_back(std::chrono::duration<double>(clock::now() - start).count());
      evaluations = state.grid_updates() - before;
      sink += state.values()[grid.size() / 2];
    }
    {
      const auto start = clock::now();
      auto fit = fit_batch(all, grid);
      batch_t.push_back(std::chrono::duration<double>(clock::now() - start).count());
      batch_phases.push_back(fit.seconds);
      sink += fit.estimate.values[grid.size() / 2];
    }
  }

  TimingResult out;
  out.n = config.n;
  out.n1 = n1;
  out.grid_points = grid.size();
  out.repetitions = config.repetitions;
  out.recursive_resume_seconds = median(resume_t);
  out.recursive_build_seconds = median(build_t);
  out.batch_recompute_seconds = median(batch_t);
  out.ratio = out.recursive_resume_seconds > 0.0 ? out.batch_recompute_seconds / out.recursive_resume_seconds
                                                 : std::numeric_limits<double>::infinity();
  out.recursive_build_phases = median_phases(build_phases);
  out.batch_phases = median_phases(batch_phases);
  out.resume_grid_evaluations = evaluations;
  if (!std::isfinite(sink))
    out.ratio = std::numeric_limits<double>::quiet_NaN();
  return out;
}

} // namespace rkde
