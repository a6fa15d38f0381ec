#include "waveguide/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "waveguide/errors.hpp"

namespace waveguide::specfun {
namespace {

using std::numbers::pi;

constexpr double kEps = 1e-16;
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxIter = 100000;
constexpr double kEuler = 0.577215664901532860606512090082;
// Temme series below this argument, continued fractions above.
constexpr double kSeriesLimit = 2.0;

void check_order(int order) {
  if (order < 0 || order > kMaxOrder) {
    throw DomainError("Bessel order " + std::to_string(order) + " outside [0, " +
                      std::to_string(kMaxOrder) + "]");
  }
}

constexpr double kHankelMinX = 25.0;
constexpr double kHankelMaxTerm = 10.0;

// Terms t_k = a_k(nu) / x^k of the Hankel expansions, summed in the four
// sign patterns needed below. Returns nullopt if the series does not reach
// full precision before its terms start to grow.
struct HankelSums {
  double p = 1.0;    // t0 - t2 + t4 - ...
  double q = 0.0;    // t1 - t3 + t5 - ...
  double alt = 1.0;  // t0 - t1 + t2 - ...
  double all = 1.0;  // t0 + t1 + t2 + ...
};

std::optional<HankelSums> hankel_sums(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  HankelSums s;
  double term = 1.0;
  double previous = 1.0;
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    // Early terms may grow for large orders; too much growth costs digits
    // to cancellation, growth past the order means the series diverges.
    if (mag > kHankelMaxTerm) return std::nullopt;
    if (mag > previous && k > nu + 1.0) return std::nullopt;
    previous = mag;
    if (k % 2 == 0) {
      s.p += ((k / 2) % 2 == 0) ? term : -term;
    } else {
      s.q += (((k - 1) / 2) % 2 == 0) ? term : -term;
    }
    s.alt += (k % 2 == 0) ? term : -term;
    s.all += term;
    if (mag < 1e-17) return s;
  }
  return std::nullopt;
}

// cos/sin of x - (2 nu + 1) pi / 4 for integer nu without losing the
// reduction of the constant phase.
void hankel_phase(int nu, double x, double& c, double& s) {
  const int octant = (2 * nu + 1) % 8;
  const double cx = std::cos(x);
  const double sx = std::sin(x);
  const double h = std::numbers::sqrt2 / 2.0;
  // cos(k pi / 4) and sin(k pi / 4) for k = 0..7
  const double ck[8] = {1.0, h, 0.0, -h, -1.0, -h, 0.0, h};
  const double sk[8] = {0.0, h, 1.0, h, 0.0, -h, -1.0, -h};
  c = cx * ck[octant] + sx * sk[octant];
  s = sx * ck[octant] - cx * sk[octant];
}

std::optional<CylinderSet> jy_hankel(int order, double x) {
  if (x < kHankelMinX) return std::nullopt;
  const auto s0 = hankel_sums(order, x);
  const auto s1 = hankel_sums(order + 1, x);
  if (!s0 || !s1) return std::nullopt;
  const double amp = std::sqrt(2.0 / (pi * x));
  double c0, n0, c1, n1;
  hankel_phase(order, x, c0, n0);
  hankel_phase(order + 1, x, c1, n1);
  CylinderSet out;
  out.j = amp * (s0->p * c0 - s0->q * n0);
  out.y = amp * (s0->p * n0 + s0->q * c0);
  const double j1 = amp * (s1->p * c1 - s1->q * n1);
  const double y1 = amp * (s1->p * n1 + s1->q * c1);
  out.jp = order / x * out.j - j1;
  out.yp = order / x * out.y - y1;
  return out;
}

// Steed's method with Temme's series for small x.
CylinderSet jy_continued_fraction(int order, double x) {
  const double nu = order;
  const int nl = x < kSeriesLimit ? order : std::max(0, static_cast<int>(nu - x + 1.5));
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double w = xi2 / pi;

  // CF1 for J'_nu / J_nu.
  int isign = 1;
  double h = std::max(nu * xi, kFpMin);
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 0;
  for (; i < kMaxIter; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b - 1.0 / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (i == kMaxIter) throw ConvergenceError("J/Y continued fraction CF1 did not converge");

  double rjl = isign * kFpMin;
  double rjpl = h * rjl;
  const double rjl1 = rjl;
  const double rjp1 = rjpl;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;

  double rjmu, rymu, rymup, ry1;
  if (x < kSeriesLimit) {
    // mu == 0 here, so the gamma-function factors reduce to constants.
    const double x2 = 0.5 * x;
    const double dl = -std::log(x2);
    double ff = 2.0 / pi * (-kEuler + dl);
    double p = 1.0 / pi;
    double q = 1.0 / pi;
    double cc = 1.0;
    const double dd = -x2 * x2;
    double sum = ff;
    double sum1 = p;
    for (i = 1; i < kMaxIter; ++i) {
      ff = (i * ff + p + q) / (static_cast<double>(i) * i);
      cc *= dd / i;
      p /= i;
      q /= i;
      const double del = cc * ff;
      sum += del;
      sum1 += cc * p - i * del;
      if (std::abs(del) < (1.0 + std::abs(sum)) * kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceError("Y series did not converge");
    rymu = -sum;
    ry1 = -sum1 * xi2;
    rymup = mu * xi * rymu - ry1;
    rjmu = w / (rymup - f * rymu);
  } else {
    double a = 0.25 - mu2;
    double p = -0.5 * xi;
    double q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    double fct = a * xi / (p * p + q * q);
    double cr = br + q * fct;
    double ci = bi + p * fct;
    double den = br * br + bi * bi;
    double dr = br / den;
    double di = -bi / den;
    double dlr = cr * dr - ci * di;
    double dli = cr * di + ci * dr;
    double temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for (i = 1; i < kMaxIter; ++i) {
      a += 2 * i;
      bi += 2.0;
      dr = a * dr + br;
      di = a * di + bi;
      if (std::abs(dr) + std::abs(di) < kFpMin) dr = kFpMin;
      fct = a / (cr * cr + ci * ci);
      cr = br + cr * fct;
      ci = bi - ci * fct;
      if (std::abs(cr) + std::abs(ci) < kFpMin) cr = kFpMin;
      den = dr * dr + di * di;
      dr /= den;
      di /= -den;
      dlr = cr * dr - ci * di;
      dli = cr * di + ci * dr;
      temp = p * dlr - q * dli;
      q = p * dli + q * dlr;
      p = temp;
      if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceError("J/Y continued fraction CF2 did not converge");
    const double gam = (p - f) / q;
    rjmu = std::copysign(std::sqrt(w / ((p - f) * gam + q)), rjl);
    rymu = rjmu * gam;
    rymup = rjmu * (gam * p + q);
    ry1 = mu * xi * rymu - rymup;
  }

  const double scale = rjmu / rjl;
  CylinderSet out;
  out.j = rjl1 * scale;
  out.jp = rjp1 * scale;
  for (int k = 1; k <= nl; ++k) {
    const double rytemp = (mu + k) * xi2 * ry1 - rymu;
    rymu = ry1;
    ry1 = rytemp;
  }
  out.y = rymu;
  out.yp = nu * xi * rymu - ry1;
  return out;
}

struct ScaledIk {
  FunctionPair i;
  FunctionPair k;
};

std::optional<ScaledIk> ik_hankel(int order, double x) {
  if (x < kHankelMinX) return std::nullopt;
  const auto s0 = hankel_sums(order, x);
  const auto s1 = hankel_sums(order + 1, x);
  if (!s0 || !s1) return std::nullopt;
  const double ia = 1.0 / std::sqrt(2.0 * pi * x);
  const double ka = std::sqrt(pi / (2.0 * x));
  ScaledIk out;
  out.i.value = ia * s0->alt;
  out.k.value = ka * s0->all;
  const double i1 = ia * s1->alt;
  const double k1 = ka * s1->all;
  out.i.derivative = i1 + order / x * out.i.value;
  out.k.derivative = -k1 + order / x * out.k.value;
  return out;
}

// Temme's method: CF1 for I'/I, series (x < 2) or Steed's CF2 for K, both
// carried with the exponential scale removed.
ScaledIk ik_continued_fraction(int order, double x) {
  const double nu = order;
  const int nl = order;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  double h = std::max(nu * xi, kFpMin);
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 0;
  for (; i < kMaxIter; ++i) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i == kMaxIter) throw ConvergenceError("I continued fraction CF1 did not converge");

  double ril = kFpMin;
  double ripl = h * ril;
  const double ril1 = ril;
  const double rip1 = ripl;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
  }
  const double f = ripl / ril;

  double rkmu, rk1;
  if (x < kSeriesLimit) {
    const double x2 = 0.5 * x;
    double ff = -kEuler - std::log(x2);
    double sum = ff;
    double p = 0.5;
    double q = 0.5;
    double cc = 1.0;
    const double dd = x2 * x2;
    double sum1 = p;
    for (i = 1; i < kMaxIter; ++i) {
      ff = (i * ff + p + q) / (static_cast<double>(i) * i);
      cc *= dd / i;
      p /= i;
      q /= i;
      const double del = cc * ff;
      sum += del;
      sum1 += cc * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceError("K series did not converge");
    const double ex = std::exp(x);
    rkmu = sum * ex;
    rk1 = sum1 * xi2 * ex;
  } else {
    b = 2.0 * (1.0 + x);
    d = 1.0 / b;
    h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (i = 1; i < kMaxIter; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i == kMaxIter) throw ConvergenceError("K continued fraction CF2 did not converge");
    h = a1 * h;
    rkmu = std::sqrt(pi / (2.0 * x)) / s;
    rk1 = rkmu * (x + 0.5 - h) * xi;
  }
  const double rkmup = -rk1;
  const double rimu = xi / (f * rkmu - rkmup);
  ScaledIk out;
  out.i.value = rimu * ril1 / ril;
  out.i.derivative = rimu * rip1 / ril;
  for (int k = 1; k <= nl; ++k) {
    const double rktemp = k * xi2 * rk1 + rkmu;
    rkmu = rk1;
    rk1 = rktemp;
  }
  out.k.value = rkmu;
  out.k.derivative = nu * xi * rkmu - rk1;
  return out;
}

ScaledIk ik_scaled(int order, double x) {
  if (auto h = ik_hankel(order, x)) return *h;
  return ik_continued_fraction(order, x);
}

void require_positive(BesselKind kind, double x) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(to_string(kind)) + " requires x > 0, got " +
                      std::to_string(x));
  }
}

// J_m and I_m near 0 behave like (x/2)^m / m!.
double at_origin(int order, bool derivative) {
  if (!derivative) return order == 0 ? 1.0 : 0.0;
  return order == 1 ? 0.5 : 0.0;
}

double unscale(double scaled, double exponent) {
  const double v = scaled * std::exp(exponent);
  if (!std::isfinite(v)) {
    throw OverflowError("I_m(x) overflows double precision; use bessel_i_scaled");
  }
  return v;
}

}  // namespace

std::string_view to_string(BesselKind kind) {
  switch (kind) {
    case BesselKind::J: return "J";
    case BesselKind::Y: return "Y";
    case BesselKind::I: return "I";
    case BesselKind::K: return "K";
  }
  return "?";
}

CylinderSet bessel_jy(int order, double x) {
  check_order(order);
  require_positive(BesselKind::Y, x);
  if (auto h = jy_hankel(order, x)) return *h;
  return jy_continued_fraction(order, x);
}

FunctionPair bessel_i_scaled(int order, double x) {
  check_order(order);
  if (x == 0.0) return {at_origin(order, false), at_origin(order, true)};
  require_positive(BesselKind::I, x);
  return ik_scaled(order, x).i;
}

FunctionPair bessel_k_scaled(int order, double x) {
  check_order(order);
  require_positive(BesselKind::K, x);
  return ik_scaled(order, x).k;
}

double bessel(BesselKind kind, int order, double x) {
  check_order(order);
  switch (kind) {
    case BesselKind::J:
      if (x == 0.0) return at_origin(order, false);
      require_positive(kind, x);
      return bessel_jy(order, x).j;
    case BesselKind::Y:
      return bessel_jy(order, x).y;
    case BesselKind::I:
      if (x == 0.0) return at_origin(order, false);
      require_positive(kind, x);
      return unscale(ik_scaled(order, x).i.value, x);
    case BesselKind::K:
      require_positive(kind, x);
      return ik_scaled(order, x).k.value * std::exp(-x);
  }
  throw DomainError("unknown Bessel kind");
}

double bessel_derivative(BesselKind kind, int order, double x) {
  check_order(order);
  switch (kind) {
    case BesselKind::J:
      if (x == 0.0) return at_origin(order, true);
      require_positive(kind, x);
      return bessel_jy(order, x).jp;
    case BesselKind::Y:
      return bessel_jy(order, x).yp;
    case BesselKind::I:
      if (x == 0.0) return at_origin(order, true);
      require_positive(kind, x);
      return unscale(ik_scaled(order, x).i.derivative, x);
    case BesselKind::K:
      require_positive(kind, x);
      return ik_scaled(order, x).k.derivative * std::exp(-x);
  }
  throw DomainError("unknown Bessel kind");
}

BesselZero bessel_zero(int order, int index) {
  check_order(order);
  if (index < 1) throw DomainError("Bessel zero index must be >= 1");

  // J_m is positive on (0, j_{m,1}) and j_{m,1} > m; consecutive zeros are
  // more than 3 apart, so a 0.5 stride cannot skip one.
  constexpr double kStride = 0.5;
  double lo = std::max(0.5, static_cast<double>(order));
  double f_lo = bessel(BesselKind::J, order, lo);
  int found = 0;
  double hi = lo;
  double f_hi = f_lo;
  while (true) {
    hi = lo + kStride;
    f_hi = bessel(BesselKind::J, order, hi);
    if ((f_lo > 0.0) != (f_hi > 0.0) || f_hi == 0.0) {
      if (++found == index) break;
    }
    lo = hi;
    f_lo = f_hi;
  }

  // McMahon's expansion as the starting point when it lands in the bracket.
  const double mu = 4.0 * order * order;
  const double beta = (index + 0.5 * order - 0.25) * pi;
  const double e = 8.0 * beta;
  double x = beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e) -
             32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * std::pow(e, 5));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  const bool lo_positive = f_lo > 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const CylinderSet v = bessel_jy(order, x);
    if (v.j == 0.0) return {order, index, x};
    if ((v.j > 0.0) == lo_positive) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - v.j / v.jp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      return {order, index, next};
    }
    x = next;
  }
  throw ConvergenceError("Bessel zero refinement did not settle in 100 iterations");
}

}  // namespace waveguide::specfun
