#include "rkde/errors.hpp"
#include "rkde/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace rkde;
using boost::math::quadrature::gauss_kronrod;

namespace {

template<typename F>
double
quad(F f)
{
  return gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 15, 1e-14);
}

} // namespace

TEST_CASE("gaussian kernel values")
{
  const Kernel k;
  CHECK(k.eval(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(k.eval(1.0) == doctest::Approx(0.2419707245).epsilon(1e-10));
  CHECK(k.eval(1.0) == k.eval(-1.0));
  CHECK(k.eval(2.5) == k.eval(-2.5));
  CHECK(k(0.3) == k.eval(0.3));
}

TEST_CASE("second derivative values")
{
  const Kernel k;
  CHECK(k.eval_second_derivative(1.0) == 0.0);
  CHECK(k.eval_second_derivative(0.0) == doctest::Approx(-0.3989422804).epsilon(1e-10));
  CHECK(k.second_derivative(0.7) == k.eval_second_derivative(0.7));
}

TEST_CASE("non-finite arguments are rejected")
{
  const Kernel k;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(k.eval(nan), DomainError);
  CHECK_THROWS_AS(k.eval(inf), DomainError);
  CHECK_THROWS_AS(k.eval_second_derivative(-inf), DomainError);
}

TEST_CASE("moments by quadrature")
{
  const Kernel k;
  CHECK(std::abs(quad([&](double u) { return k.eval(u); }) - 1.0) < 1e-8);
  CHECK(std::abs(quad([&](double u) { return u * k.eval(u); })) < 1e-8);
  CHECK(std::abs(quad([&](double u) { return u * u * k.eval(u); }) - k.constants().mu2) < 1e-8);
  CHECK(std::abs(quad([&](double u) { return k.eval(u) * k.eval(u); }) - k.constants().r_k) < 1e-8);
  CHECK(std::abs(quad([&](double u) { return k.eval_second_derivative(u); })) < 1e-8);
}

TEST_CASE("gaussian constants")
{
  const auto c = Kernel{}.constants();
  CHECK(c.r_k == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-14));
  CHECK(c.r_k == doctest::Approx(0.2820947918).epsilon(1e-10));
  CHECK(c.mu2 == 1.0);
  CHECK(c.theta == doctest::Approx(std::pow(0.2820947918, 0.8)).epsilon(1e-9));
  CHECK(c.theta == doctest::Approx(0.36329).epsilon(1e-4));
}

TEST_CASE("second derivative matches finite differences")
{
  const Kernel k;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double step = 1e-4;
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng);
    const double fd = (k.eval(x + step) - 2.0 * k.eval(x) + k.eval(x - step)) / (step * step);
    CHECK(std::abs(fd - k.eval_second_derivative(x)) < 1e-6);
  }
}

TEST_CASE("family name")
{
  CHECK(std::string(to_string(KernelFamily::gaussian)) == "gaussian");
}
