#include "rkde/kernels.hpp"

#include "rkde/errors.hpp"

#include <cmath>
#include <numbers>

namespace rkde {

namespace {

constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

void
require_finite(double u, const char* where)
{
  if (!std::isfinite(u))
    throw DomainError(std::string(where) + ": argument must be finite");
}

} // namespace

double
Kernel::operator()(double u) const noexcept
{
  return inv_sqrt_2pi * std::exp(-0.5 * u * u);
}

double
Kernel::second_derivative(double u) const noexcept
{
  return (u * u - 1.0) * (*this)(u);
}

double
Kernel::eval(double u) const
{
  require_finite(u, "Kernel::eval");
  return (*this)(u);
}

double
Kernel::eval_second_derivative(double u) const
{
  require_finite(u, "Kernel::eval_second_derivative");
  return second_derivative(u);
}

KernelConstants
Kernel::constants() const
{
  // Gaussian: int K^2 = 1 / (2 sqrt(pi)), unit variance.
  const double r_k = 0.5 * std::numbers::inv_sqrtpi;
  const double mu2 = 1.0;
  return { r_k, mu2, std::pow(r_k, 0.8) * std::pow(mu2, 0.4) };
}

const char*
to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
  }
  return "unknown";
}

} // namespace rkde
