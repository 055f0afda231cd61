#pragma once

namespace rkde {

enum class KernelFamily
{
  gaussian
};

//! Analytic constants of a second-order kernel.
//!   r_k   = int K(u)^2 du
//!   mu2   = int u^2 K(u) du
//!   theta = r_k^(4/5) * mu2^(2/5)
struct KernelConstants
{
  double r_k;
  double mu2;
  double theta;
};

//! A symmetric, bounded, second-order kernel. Every downstream formula only
//! sees `eval`, `eval_second_derivative` and `constants`, so a new family
//! needs nothing else.
class Kernel
{
public:
  constexpr explicit Kernel(KernelFamily family = KernelFamily::gaussian)
    : family_(family)
  {}

  KernelFamily family() const { return family_; }

  //! K(u). Throws DomainError for non-finite u.
  double eval(double u) const;

  //! K''(u); for the Gaussian this is (u^2 - 1) K(u).
  double eval_second_derivative(double u) const;

  KernelConstants constants() const;

  //! Unchecked hot-path variants used inside the O(n * grid) loops; the
  //! caller guarantees a finite argument.
  double operator()(double u) const noexcept;
  double second_derivative(double u) const noexcept;

private:
  KernelFamily family_;
};

const char* to_string(KernelFamily family);

} // namespace rkde
