#include "rkde/metrics.hpp"

#include "rkde/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rkde {

namespace {

double
mean_of(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

//! Mean and standard error of the mean (zero for a single value).
std::pair<double, double>
mean_se(std::span<const double> v)
{
  const double m = mean_of(v);
  if (v.size() < 2)
    return { m, 0.0 };
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  const auto n = static_cast<double>(v.size());
  return { m, std::sqrt(ss / (n - 1.0) / n) };
}

std::string
num(double x)
{
  return fmt::format("{:.10g}", x);
}

} // namespace

double
wise(const EvaluationGrid& grid, std::span<const double> values, const Distribution& truth)
{
  if (values.size() != grid.size())
    throw DomainError("one value per grid point required");
  const auto pts = grid.points();
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double f = truth.density(pts[i]);
    const double d = values[i] - f;
    const double term = d * d * f;
    s += (i == 0 || i + 1 == pts.size()) ? 0.5 * term : term;
  }
  return s * grid.spacing();
}

double
wise(const DensityEstimate& estimate, const Distribution& truth)
{
  return wise(estimate.grid, estimate.values, truth);
}

MseResult
mse_at(std::span<const double> estimates, double x0, const Distribution& truth)
{
  if (estimates.empty())
    throw DomainError("mse_at needs at least one replication");
  const double f = truth.density(x0);
  if (!(f > 0.0))
    throw DomainError("mse_at needs f(x0) > 0");
  double s = 0.0;
  for (double e : estimates)
    s += (e - f) * (e - f);
  const double mse = s / static_cast<double>(estimates.size());
  return { mse, std::sqrt(mse) / f };
}

BiasVariance
bias_variance_decomposition(std::span<const double> estimates, double truth)
{
  if (estimates.size() < min_decomposition_replications)
    throw PrecisionError(fmt::format("bias/variance decomposition needs at least {} replications, got {}",
                                     min_decomposition_replications,
                                     estimates.size()));
  BiasVariance out;
  out.replications = estimates.size();
  out.mean = mean_of(estimates);
  out.bias = out.mean - truth;
  double ss = 0.0;
  for (double e : estimates)
    ss += (e - out.mean) * (e - out.mean);
  out.variance = ss / static_cast<double>(estimates.size() - 1);
  return out;
}

CltReport
clt_diagnostics(std::span<const double> estimates, double scale, double predicted_variance)
{
  if (estimates.size() < 2)
    throw PrecisionError("CLT diagnostics need at least two replications");
  CltReport r;
  r.replications = estimates.size();
  r.adequate = estimates.size() >= 1000;
  r.mean = mean_of(estimates);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double e : estimates) {
    const double d = e - r.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const auto n = static_cast<double>(estimates.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  r.variance = m2 * n / (n - 1.0);
  r.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  r.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  r.variance_ratio = scale * scale * r.variance / predicted_variance;
  return r;
}

CellSummary
summarize(std::span<const ReplicationReport> reports, std::span<const double> x0, std::span<const double> truth_at)
{
  if (reports.empty())
    throw DomainError("no replication reports to summarize");
  if (x0.size() != truth_at.size())
    throw DomainError("one truth value per named point required");

  CellSummary cell;
  cell.replications = reports.size();
  std::vector<double> w;
  w.reserve(reports.size());
  double bw = 0.0;
  double pi = 0.0;
  for (const auto& r : reports) {
    w.push_back(r.wise);
    bw += r.bandwidth;
    pi += r.pi_hat;
    cell.total_cpu_seconds += r.seconds;
  }
  const auto nrep = static_cast<double>(reports.size());
  std::tie(cell.mwise, cell.mwise_se) = mean_se(w);
  cell.mean_bandwidth = bw / nrep;
  cell.mean_pi_hat = pi / nrep;

  for (std::size_t j = 0; j < x0.size(); ++j) {
    std::vector<double> sq;
    sq.reserve(reports.size());
    double h = 0.0;
    for (const auto& r : reports) {
      if (r.squared_errors.size() != x0.size())
        throw DomainError("replication report lacks a named point");
      sq.push_back(r.squared_errors[j]);
      h += r.bandwidths.size() == x0.size() ? r.bandwidths[j] : r.bandwidth;
    }
    PointSummary p;
    p.x0 = x0[j];
    std::tie(p.mse, p.mse_se) = mean_se(sq);
    p.relative_root = truth_at[j] > 0.0 ? std::sqrt(p.mse) / truth_at[j] : 0.0;
    p.mean_bandwidth = h / nrep;
    cell.points.push_back(p);
  }
  return cell;
}

nlohmann::json
to_json(const CellSummary& cell)
{
  nlohmann::json j;
  j["table"] = cell.table;
  j["estimator"] = cell.estimator;
  j["distribution"] = cell.distribution;
  j["missing"] = cell.missing;
  j["n"] = cell.n;
  j["missing_percent"] = cell.missing_percent;
  j["rho"] = cell.rho ? nlohmann::json(*cell.rho) : nlohmann::json(nullptr);
  j["replications"] = cell.replications;
  j["mwise"] = cell.mwise;
  j["mwise_se"] = cell.mwise_se;
  j["mean_bandwidth"] = cell.mean_bandwidth;
  j["mean_pi_hat"] = cell.mean_pi_hat;
  auto pts = nlohmann::json::array();
  for (const auto& p : cell.points)
    pts.push_back({ { "x0", p.x0 },
                    { "mse", p.mse },
                    { "mse_se", p.mse_se },
                    { "relative_root_mse", p.relative_root },
                    { "mean_bandwidth", p.mean_bandwidth } });
  j["points"] = pts;
  return j;
}

std::string
csv_header(bool local, bool with_timing)
{
  std::string h = "table,distribution,estimator,n,missing%,rho,replications";
  h += local ? ",x0,bandwidth,relative_root_mse,mse,mse_se" : ",MWISE,MWISE_se,bandwidth,pi_hat";
  if (with_timing)
    h += ",CPU-seconds";
  return h;
}

std::string
csv_row(const CellSummary& cell, bool local, bool with_timing)
{
  const std::string head = fmt::format("{},\"{}\",{},{},{},{},{}",
                                       cell.table,
                                       cell.distribution,
                                       cell.estimator,
                                       cell.n,
                                       num(cell.missing_percent),
                                       cell.rho ? num(*cell.rho) : std::string(),
                                       cell.replications);
  const std::string cpu = with_timing ? "," + num(cell.total_cpu_seconds) : std::string();
  if (!local)
    return fmt::format(
      "{},{},{},{},{}{}\n", head, num(cell.mwise), num(cell.mwise_se), num(cell.mean_bandwidth), num(cell.mean_pi_hat), cpu);
  std::string out;
  for (const auto& p : cell.points)
    out += fmt::format(
      "{},{},{},{},{},{}{}\n", head, num(p.x0), num(p.mean_bandwidth), num(p.relative_root), num(p.mse), num(p.mse_se), cpu);
  return out;
}

} // namespace rkde
