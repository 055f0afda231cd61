#include "rkde/bandwidth.hpp"
#include "rkde/errors.hpp"
#include "rkde/estimators.hpp"
#include "rkde/experiments.hpp"
#include "rkde/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rkde;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_input = 3;
constexpr int exit_numeric = 4;

json
defaults_json()
{
  return { { "kernel", to_string(KernelFamily::gaussian) },
           { "stepsize_recursive1", "1/n" },
           { "stepsize_recursive2", "0.8/n" },
           { "bandwidth_exponent", 0.2 },
           { "pilot_stepsize_i1", pilot_stepsize_i1 },
           { "pilot_stepsize_i2", pilot_stepsize_i2 },
           { "pilot_exponent_i1", pilot_exponent_i1 },
           { "pilot_exponent_i2", pilot_exponent_i2 },
           { "pilot_exponent_propensity", pilot_exponent_propensity },
           { "propensity_floor", default_propensity_floor },
           { "functional_floor", functional_floor },
           { "propensity_recursive", "recursive Nadaraya-Watson on the auxiliary, else empirical" },
           { "propensity_batch", "Nadaraya-Watson on the auxiliary, else empirical" },
           { "rng", "mt19937_64 seeded with splitmix64(splitmix64(seed) + rep)" } };
}

void
write_file(const fs::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write " + path.string());
  out << content;
}

std::size_t
resolve_threads(std::size_t requested)
{
  if (requested > 0)
    return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string
with_manifest(const std::string& hash, const std::string& rows)
{
  std::string out;
  std::istringstream in(rows);
  std::string line;
  while (std::getline(in, line))
    out += hash + "," + line + "\n";
  return out;
}

struct ReproduceArgs
{
  int table = 1;
  std::vector<std::size_t> n;
  std::vector<double> missing;
  std::vector<double> rho;
  std::optional<std::size_t> replications;
  std::uint64_t seed = 20170101;
  std::optional<std::size_t> grid;
  std::size_t threads = 0;
  std::string out_dir = "results";
  std::optional<double> gamma0;
  std::string estimator = "both";
};

int
cmd_reproduce(const ReproduceArgs& a)
{
  TableOverrides o;
  if (!a.n.empty())
    o.n = a.n;
  if (!a.missing.empty()) {
    std::vector<double> rates;
    for (double p : a.missing)
      rates.push_back(p / 100.0);
    o.missing = rates;
  }
  if (!a.rho.empty())
    o.rho = a.rho;
  o.replications = a.replications;
  o.seed = a.seed;
  o.grid_points = a.grid;
  o.gamma0 = a.gamma0;
  o.estimator = a.estimator;

  const auto designs = table_designs(a.table, o);
  const bool local = a.table == 5;

  RunManifest manifest;
  manifest.command = "reproduce";
  manifest.seed = a.seed;
  manifest.config = { { "table", a.table },
                      { "n", a.n },
                      { "missing_percent", a.missing },
                      { "rho", a.rho },
                      { "replications", a.replications ? json(*a.replications) : json(nullptr) },
                      { "grid", a.grid ? json(*a.grid) : json(nullptr) },
                      { "gamma0", a.gamma0 ? json(*a.gamma0) : json(nullptr) },
                      { "estimator", a.estimator },
                      { "defaults", defaults_json() } };
  const std::string stem = fmt::format("table{}", a.table);
  manifest.outputs = { stem + ".csv", stem + ".json", stem + "_timing.csv" };
  const std::string hash = manifest.hash();

  const std::size_t threads = resolve_threads(a.threads);
  std::string rows;
  std::string timing_rows;
  json cells = json::array();
  for (const auto& d : designs) {
    const auto result = run_cell(d, threads);
    rows += csv_row(result.summary, local);
    timing_rows += csv_row(result.summary, local, true);
    cells.push_back(to_json(result.summary));
    std::cerr << fmt::format("{} {} {} n={} missing={} done\n",
                             d.table,
                             d.distribution.name(),
                             d.estimator.label,
                             d.n,
                             to_string(d.missing));
  }

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file(dir / (stem + ".csv"), "manifest," + csv_header(local) + "\n" + with_manifest(hash, rows));
  write_file(dir / (stem + "_timing.csv"),
             "manifest," + csv_header(local, true) + "\n" + with_manifest(hash, timing_rows));
  json doc = { { "manifest", manifest.to_json() }, { "cells", cells } };
  write_file(dir / (stem + ".json"), doc.dump(2) + "\n");
  std::cout << fmt::format("wrote {} cells to {}\n", designs.size(), (dir / (stem + ".csv")).string());
  return 0;
}

struct EstimateArgs
{
  std::string input;
  std::string column;
  std::optional<std::string> flag_column;
  std::optional<std::string> sentinel;
  std::optional<std::string> aux_column;
  std::size_t grid = 500;
  double gamma0 = 1.0;
  std::string estimator = "both";
  std::string out_dir = "results";
};

int
cmd_estimate(const EstimateArgs& a)
{
  std::ifstream in(a.input, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + a.input);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  const auto table = parse_csv(text);
  const auto data = load_observations(table, { a.column, a.flag_column, a.sentinel, a.aux_column });
  const auto observed = observed_values(data);
  if (observed.size() < 10)
    throw InputError(fmt::format("column '{}' has {} observed values; at least 10 are required",
                                 a.column,
                                 observed.size()));
  if (a.grid < 2)
    throw DomainError("grid needs at least two points");
  const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
  if (!(*hi > *lo))
    throw DegenerateDataError("observed values have no spread");
  const auto grid = EvaluationGrid::uniform(*lo, *hi, a.grid);

  RunManifest manifest;
  manifest.command = "estimate";
  manifest.config = { { "column", a.column },
                      { "flag_column", a.flag_column ? json(*a.flag_column) : json(nullptr) },
                      { "sentinel", a.sentinel ? json(*a.sentinel) : json(nullptr) },
                      { "aux_column", a.aux_column ? json(*a.aux_column) : json(nullptr) },
                      { "grid", a.grid },
                      { "gamma0", a.gamma0 },
                      { "estimator", a.estimator },
                      { "defaults", defaults_json() } };
  manifest.input_hashes = { git_blob_hash(text) };
  manifest.outputs = { "density.csv", "estimate.json" };
  const std::string hash = manifest.hash();

  const bool run_rec = a.estimator != "batch";
  const bool run_batch = a.estimator != "recursive";
  std::optional<FitResult> rec;
  std::optional<FitResult> bat;
  json meta = { { "manifest", manifest.to_json() },
                { "n", data.size() },
                { "observed", observed.size() },
                { "observed_fraction", static_cast<double>(observed.size()) / static_cast<double>(data.size()) } };
  if (run_rec) {
    RecursiveOptions opts;
    opts.gamma0 = a.gamma0;
    const auto plan = plan_recursive(data, opts);
    rec = fit_recursive(data, grid, opts);
    meta["recursive"] = { { "bandwidth_at_n", rec->estimate.meta.bandwidth },
                          { "bandwidth_coefficient", rec->estimate.meta.bandwidth_coefficient },
                          { "gamma0", a.gamma0 },
                          { "pi_hat", rec->estimate.meta.pi_hat },
                          { "propensity", to_string(rec->estimate.meta.propensity) },
                          { "i1", plan.functionals.i1 },
                          { "i2", plan.functionals.i2 } };
  }
  if (run_batch) {
    const auto plan = plan_batch(data);
    bat = fit_batch(data, grid);
    meta["batch"] = { { "bandwidth", bat->estimate.meta.bandwidth },
                      { "pi_hat", bat->estimate.meta.pi_hat },
                      { "propensity", to_string(bat->estimate.meta.propensity) },
                      { "i1", plan.functionals.i1 },
                      { "i2", plan.functionals.i2 } };
  }
  meta["pi_hat"] = run_rec ? rec->estimate.meta.pi_hat : bat->estimate.meta.pi_hat;

  std::string csv = "manifest,x";
  if (run_rec)
    csv += ",recursive";
  if (run_batch)
    csv += ",batch";
  csv += "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += fmt::format("{},{:.10g}", hash, grid.points()[i]);
    if (run_rec)
      csv += fmt::format(",{:.10g}", rec->estimate.values[i]);
    if (run_batch)
      csv += fmt::format(",{:.10g}", bat->estimate.values[i]);
    csv += "\n";
  }

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file(dir / "density.csv", csv);
  write_file(dir / "estimate.json", meta.dump(2) + "\n");
  std::cout << fmt::format("n={} observed={} pi_hat={:.4f}", data.size(), observed.size(), meta["pi_hat"].get<double>());
  if (run_rec)
    std::cout << fmt::format(" recursive h_n={:.4g}", rec->estimate.meta.bandwidth);
  if (run_batch)
    std::cout << fmt::format(" batch h={:.4g}", bat->estimate.meta.bandwidth);
  std::cout << "\n";
  return 0;
}

struct BenchArgs
{
  std::size_t n = 500;
  std::size_t grid = 500;
  std::size_t repetitions = 20;
  double missing = 0.0;
  std::uint64_t seed = 20170101;
  std::optional<std::string> out_dir;
};

json
phases_json(const PhaseSeconds& p)
{
  return { { "pilot", p.pilot }, { "plug_in", p.plug_in }, { "main", p.main } };
}

int
cmd_bench(const BenchArgs& a)
{
  if (a.n < 100)
    throw DomainError("bench needs n >= 100");
  if (a.grid < 2)
    throw DomainError("grid needs at least two points");
  TimingConfig c;
  c.n = a.n;
  c.grid_points = a.grid;
  c.repetitions = a.repetitions;
  c.missing = MissingnessSpec::mcar(a.missing / 100.0);
  c.seed = a.seed;
  const auto r = timing_benchmark(c);

  json j = { { "n", r.n },
             { "n1", r.n1 },
             { "grid", r.grid_points },
             { "repetitions", r.repetitions },
             { "missing_percent", a.missing },
             { "recursive_resume_seconds", r.recursive_resume_seconds },
             { "recursive_build_seconds", r.recursive_build_seconds },
             { "batch_recompute_seconds", r.batch_recompute_seconds },
             { "ratio", r.ratio },
             { "resume_grid_evaluations", r.resume_grid_evaluations },
             { "recursive_build_phases", phases_json(r.recursive_build_phases) },
             { "batch_phases", phases_json(r.batch_phases) } };
  std::cout << fmt::format("ratio batch/recursive = {:.3f}\n", r.ratio);
  std::cout << fmt::format("  recursive resume over {} observations: {:.6f} s ({} grid evaluations)\n",
                           r.n - r.n1,
                           r.recursive_resume_seconds,
                           r.resume_grid_evaluations);
  std::cout << fmt::format("  recursive build to n1={}: pilot {:.6f} s, plug-in {:.6f} s, main {:.6f} s\n",
                           r.n1,
                           r.recursive_build_phases.pilot,
                           r.recursive_build_phases.plug_in,
                           r.recursive_build_phases.main);
  std::cout << fmt::format("  batch recompute at n={}: pilot {:.6f} s, plug-in {:.6f} s, main {:.6f} s, total {:.6f} s\n",
                           r.n,
                           r.batch_phases.pilot,
                           r.batch_phases.plug_in,
                           r.batch_phases.main,
                           r.batch_recompute_seconds);
  if (a.out_dir) {
    fs::create_directories(*a.out_dir);
    write_file(fs::path(*a.out_dir) / "bench_timing.json", j.dump(2) + "\n");
  }
  return 0;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Recursive and batch Horvitz-Thompson kernel density estimation with missing data" };
  app.set_config("--config", "", "TOML key = value file; command-line flags take precedence");
  app.require_subcommand(1);

  ReproduceArgs ra;
  auto* rep = app.add_subcommand("reproduce", "Monte Carlo reproduction of a simulation table");
  rep->add_option("--table", ra.table, "Table id")->required()->check(CLI::Range(1, 5));
  rep->add_option("--n", ra.n, "Sample sizes (repeatable)");
  rep->add_option("--missing", ra.missing, "Missing percentages (repeatable)")->check(CLI::Range(0.0, 99.999));
  rep->add_option("--rho", ra.rho, "Auxiliary correlations for table 4 (repeatable)")->check(CLI::Range(-0.999, 0.999));
  rep->add_option("--replications", ra.replications, "Replications per cell")->check(CLI::PositiveNumber);
  rep->add_option("--seed", ra.seed, "Master seed");
  rep->add_option("--grid", ra.grid, "Grid points per replication")->check(CLI::Range(2, 1000000));
  rep->add_option("--threads", ra.threads, "Worker threads (0 = hardware)");
  rep->add_option("--out-dir", ra.out_dir, "Output directory");
  rep->add_option("--gamma0", ra.gamma0, "Only this recursive stepsize constant")->check(CLI::IsMember({ 1.0, 0.8 }));
  rep->add_option("--estimator", ra.estimator, "recursive, batch or both")
    ->check(CLI::IsMember({ "recursive", "batch", "both" }));

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate a density from a CSV column");
  est->add_option("--input", ea.input, "CSV file with a header row")->required();
  est->add_option("--column", ea.column, "Value column")->required();
  auto* flag = est->add_option("--flag-column", ea.flag_column, "Column with 1 = observed, 0 = missing");
  est->add_option("--sentinel", ea.sentinel, "Cell text marking a missing value")->excludes(flag);
  est->add_option("--aux-column", ea.aux_column, "Always-observed auxiliary covariate for the propensity");
  est->add_option("--grid", ea.grid, "Grid points")->check(CLI::Range(2, 1000000));
  est->add_option("--gamma0", ea.gamma0, "Recursive stepsize constant")->check(CLI::IsMember({ 1.0, 0.8 }));
  est->add_option("--estimator", ea.estimator, "recursive, batch or both")
    ->check(CLI::IsMember({ "recursive", "batch", "both" }));
  est->add_option("--out-dir", ea.out_dir, "Output directory");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Resume-versus-recompute timing");
  bench->add_option("--n", ba.n, "Sample size")->check(CLI::Range(static_cast<std::size_t>(100), static_cast<std::size_t>(100000000)));
  bench->add_option("--grid", ba.grid, "Grid points")->check(CLI::Range(2, 1000000));
  bench->add_option("--repetitions", ba.repetitions, "Timed repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--missing", ba.missing, "MCAR missing percentage")->check(CLI::Range(0.0, 99.999));
  bench->add_option("--seed", ba.seed, "Seed");
  bench->add_option("--out-dir", ba.out_dir, "Directory for bench_timing.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*rep)
      return cmd_reproduce(ra);
    if (*est)
      return cmd_estimate(ea);
    return cmd_bench(ba);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return exit_input;
  } catch (const DegenerateDataError& e) {
    std::cerr << "numeric degeneracy: " << e.what() << "\n";
    return exit_numeric;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
