#include "rkde/errors.hpp"
#include "rkde/kernels.hpp"
#include "rkde/propensity.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace rkde;

namespace {

double
phi(double u)
{
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
}

std::vector<Observation>
with_aux(const std::vector<double>& c, const std::vector<int>& delta)
{
  std::vector<Observation> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    out.push_back(delta[i] ? Observation::observed(c[i] + 10.0, c[i]) : Observation::missing(std::nullopt, c[i]));
  return out;
}

std::vector<Observation>
mixed_sample(std::size_t n, std::uint64_t seed, double p_obs)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::bernoulli_distribution b(p_obs);
  std::vector<Observation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = z(rng);
    out.push_back(b(rng) ? Observation::observed(c, c) : Observation::missing(std::nullopt, c));
  }
  return out;
}

} // namespace

TEST_CASE("observation invariants")
{
  const auto m = Observation::missing(1.5);
  CHECK(m.delta == 0);
  CHECK(m.x == 0.0);
  CHECK(*m.t == 1.5);
  const auto o = Observation::observed(2.0);
  CHECK(o.delta == 1);
  CHECK(o.x == 2.0);
  CHECK(o.covariate() == 2.0);
  CHECK(Observation::observed(2.0, 0.5).covariate() == 0.5);
}

TEST_CASE("empirical proportion")
{
  CHECK(empirical_proportion(with_aux({ 0, 1, 2, 3 }, { 1, 1, 1, 1 })) == 1.0);
  CHECK(empirical_proportion(with_aux({ 0, 1, 2, 3 }, { 1, 0, 1, 1 })) == 0.75);
  CHECK_THROWS_AS(empirical_proportion(std::vector<Observation>{}), DomainError);

  std::mt19937_64 rng(20170101);
  std::bernoulli_distribution b(0.7);
  std::vector<Observation> data;
  for (int i = 0; i < 100000; ++i)
    data.push_back(b(rng) ? Observation::observed(1.0) : Observation::missing());
  CHECK(std::abs(empirical_proportion(data) - 0.7) < 0.01);
}

TEST_CASE("Nadaraya-Watson propensity")
{
  const auto two = with_aux({ 0.0, 1.0 }, { 1, 0 });
  const double expected = phi(0.0) / (phi(0.0) + phi(2.0));
  CHECK(nw_propensity(two, 0.0, 0.5) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(nw_propensity(two, 0.0, 0.5) == doctest::Approx(0.880).epsilon(1e-3));

  const auto all = with_aux({ -1.0, 0.2, 3.0 }, { 1, 1, 1 });
  CHECK(nw_propensity(all, 0.7, 0.3) == 1.0);
  CHECK(nw_propensity(all, -5.0, 2.0) == 1.0);

  const auto none = with_aux({ -1.0, 0.2, 3.0 }, { 0, 0, 0 });
  CHECK(nw_propensity(none, 0.0, 1.0) == default_propensity_floor);
  CHECK(nw_propensity(none, 0.0, 1.0, 0.1) == 0.1);

  CHECK_THROWS_AS(nw_propensity(two, 1e6, 1e-3), DegenerateWindowError);
  CHECK_THROWS_AS(nw_propensity(two, 0.0, 0.0), DomainError);
}

TEST_CASE("recursive Nadaraya-Watson propensity")
{
  SUBCASE("hand computation with h = (1, 0.5)")
  {
    RecursiveNwPropensity p(BandwidthSchedule(1.0, 0.2));
    const auto two = with_aux({ 0.0, 1.0 }, { 1, 0 });
    p.update(two[0], 1.0);
    p.update(two[1], 0.5);
    const double expected = phi(0.0) / (phi(0.0) + 2.0 * phi(2.0));
    CHECK(p.query(0.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(p.query(0.0) - 0.7866) < 1e-3);
  }
  SUBCASE("constant bandwidth equals the batch smoother")
  {
    const auto data = mixed_sample(1000, 3, 0.6);
    const double h = 0.4;
    RecursiveNwPropensity p(BandwidthSchedule(1.0, 0.2), { -1.0, 0.0, 0.5 });
    for (const auto& o : data)
      p.update(o, h);
    for (double at : { -2.0, -1.0, 0.0, 0.3, 0.5, 1.7 }) {
      const double batch = nw_propensity(data, at, h);
      CHECK(std::abs(p.query(at) - batch) <= 1e-12 * batch);
    }
    CHECK(std::abs(p.query_point(0) - nw_propensity(data, -1.0, h)) <= 1e-12);
    CHECK(std::abs(p.query_point(2) - nw_propensity(data, 0.5, h)) <= 1e-12);
  }
  SUBCASE("complete data gives 1")
  {
    RecursiveNwPropensity p(BandwidthSchedule(0.7, 0.2), { 0.0 });
    for (const auto& o : with_aux({ -1.0, 0.5, 2.0, 0.1 }, { 1, 1, 1, 1 }))
      p.update(o);
    CHECK(p.query(0.25) == 1.0);
    CHECK(p.query_point(0) == 1.0);
    CHECK(p.count() == 4);
  }
  SUBCASE("order insensitivity with attached bandwidths")
  {
    auto data = mixed_sample(200, 11, 0.5);
    std::vector<double> hs;
    for (std::size_t i = 0; i < data.size(); ++i)
      hs.push_back(0.2 + 0.003 * static_cast<double>(i));
    RecursiveNwPropensity a(BandwidthSchedule(1.0, 0.2));
    for (std::size_t i = 0; i < data.size(); ++i)
      a.update(data[i], hs[i]);
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), std::mt19937_64(5));
    RecursiveNwPropensity b(BandwidthSchedule(1.0, 0.2));
    for (auto i : idx)
      b.update(data[i], hs[i]);
    for (double at : { -1.0, 0.0, 0.8 })
      CHECK(a.query(at) == doctest::Approx(b.query(at)).epsilon(1e-12));
  }
}

TEST_CASE("floor bounds every estimator")
{
  const auto data = mixed_sample(300, 9, 0.2);
  const auto fitted = fit_propensity(PropensityModel::nadaraya_watson(0.05), data);
  for (const auto& o : data) {
    const double s = fitted.score(o);
    CHECK(s >= default_propensity_floor);
    CHECK(s <= 1.0);
  }
  for (double w : fitted.inverse_weights(data))
    CHECK(w <= 1.0 / default_propensity_floor);
}

TEST_CASE("fit_propensity resolution")
{
  SUBCASE("known constant")
  {
    const auto data = mixed_sample(50, 1, 0.7);
    const auto f = fit_propensity(PropensityModel::known(0.7), data);
    CHECK(f.resolved == PropensityKind::known);
    CHECK(f.scalar == 0.7);
    const auto w = f.inverse_weights(data);
    for (std::size_t i = 0; i < data.size(); ++i)
      CHECK(w[i] == (data[i].is_observed() ? 1.0 / 0.7 : 0.0));
  }
  SUBCASE("smoothers fall back to the empirical proportion without an auxiliary")
  {
    std::vector<Observation> data;
    for (int i = 0; i < 10; ++i)
      data.push_back(i % 4 == 0 ? Observation::missing() : Observation::observed(0.1 * i));
    for (auto model : { PropensityModel::nadaraya_watson(), PropensityModel::recursive_nw() }) {
      const auto f = fit_propensity(model, data);
      CHECK(f.resolved == PropensityKind::empirical);
      CHECK(f.scalar == doctest::Approx(0.7));
      CHECK(f.score(data[1]) == doctest::Approx(0.7));
    }
  }
  SUBCASE("smoothers condition on the auxiliary")
  {
    const auto data = mixed_sample(400, 2, 0.6);
    const auto nw = fit_propensity(PropensityModel::nadaraya_watson(), data);
    CHECK(nw.resolved == PropensityKind::nadaraya_watson);
    const auto rnw = fit_propensity(PropensityModel::recursive_nw(), data);
    CHECK(rnw.resolved == PropensityKind::recursive_nw);
    double mean = 0.0;
    for (const auto& o : data)
      mean += nw.score(o);
    CHECK(nw.scalar == doctest::Approx(mean / 400.0).epsilon(1e-12));
  }
  SUBCASE("complete data gives unit weights")
  {
    const auto data = mixed_sample(100, 4, 1.0);
    for (auto model : { PropensityModel::empirical(), PropensityModel::nadaraya_watson(), PropensityModel::recursive_nw() }) {
      const auto f = fit_propensity(model, data);
      CHECK(f.scalar == 1.0);
      for (double w : f.inverse_weights(data))
        CHECK(w == 1.0);
    }
  }
}
