#include "waveguide/radial.hpp"

#include <cmath>
#include <string>

#include "waveguide/errors.hpp"

namespace waveguide::radial {

using modes::Branch;
using specfun::FunctionPair;

RadialFunction::RadialFunction(Solution kind, int m, modes::RadialWavenumber wavenumber,
                               double reference)
    : kind_(kind), m_(m), k_(wavenumber), r0_(reference) {
  if (m < 0 || m > specfun::kMaxOrder) {
    throw DomainError("azimuthal order out of range: " + std::to_string(m));
  }
  if (!(reference > 0.0)) throw DomainError("radial reference radius must be > 0");
  if (kind == Solution::Decaying && k_.branch == Branch::Propagating) {
    throw DomainError("no decaying radial solution above threshold");
  }
  const double x0 = k_.kappa * r0_;
  switch (k_.branch) {
    case Branch::Propagating:
      if (kind == Solution::Irregular) {
        const auto c = specfun::bessel_jy(m, x0);
        scale_ = 1.0 / std::hypot(c.j, c.y);
      }
      break;
    case Branch::Evanescent:
      scale_ = kind == Solution::Regular ? 1.0 / specfun::bessel_i_scaled(m, x0).value
                                         : 1.0 / specfun::bessel_k_scaled(m, x0).value;
      break;
    case Branch::Degenerate:
      break;
  }
}

double RadialFunction::separation_constant() const {
  const double k2 = k_.kappa * k_.kappa;
  switch (k_.branch) {
    case Branch::Propagating: return k2;
    case Branch::Evanescent: return -k2;
    case Branch::Degenerate: return 0.0;
  }
  return 0.0;
}

FunctionPair RadialFunction::operator()(double r) const {
  const double k = k_.kappa;
  if (k_.branch == Branch::Degenerate) {
    const double m = m_;
    if (kind_ == Solution::Regular) {
      if (m_ == 0) return {1.0, 0.0};
      return {std::pow(r / r0_, m), m * std::pow(r / r0_, m - 1.0) / r0_};
    }
    if (!(r > 0.0)) throw DomainError("irregular radial solution needs r > 0");
    if (m_ == 0) {
      if (kind_ == Solution::Decaying) return {1.0, 0.0};
      return {std::log(r / r0_), 1.0 / r};
    }
    const double v = std::pow(r0_ / r, m);
    return {v, -m * v / r};
  }

  if (k_.branch == Branch::Propagating) {
    if (r == 0.0) {
      if (kind_ != Solution::Regular) throw DomainError("irregular radial solution needs r > 0");
      return {m_ == 0 ? 1.0 : 0.0, m_ == 1 ? 0.5 * k : 0.0};
    }
    const auto c = specfun::bessel_jy(m_, k * r);
    if (kind_ == Solution::Regular) return {c.j, k * c.jp};
    return {scale_ * c.y, scale_ * k * c.yp};
  }

  if (kind_ == Solution::Regular) {
    const auto s = specfun::bessel_i_scaled(m_, k * r);
    const double f = scale_ * std::exp(k * (r - r0_));
    return {f * s.value, f * k * s.derivative};
  }
  if (!(r > 0.0)) throw DomainError("irregular radial solution needs r > 0");
  const auto s = specfun::bessel_k_scaled(m_, k * r);
  const double f = scale_ * std::exp(-k * (r - r0_));
  return {f * s.value, f * k * s.derivative};
}

double lommel_antiderivative(int m, double q, double r, const FunctionPair& at_r) {
  if (q == 0.0) throw DomainError("Lommel integral needs a nonzero separation constant");
  const double mm = static_cast<double>(m) * m;
  return (r * r * at_r.derivative * at_r.derivative + (q * r * r - mm) * at_r.value * at_r.value) /
         (2.0 * q);
}

}  // namespace waveguide::radial
