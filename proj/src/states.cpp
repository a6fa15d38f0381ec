#include "waveguide/states.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "waveguide/errors.hpp"
#include "waveguide/modes.hpp"
#include "waveguide/radial.hpp"

namespace waveguide::states {
namespace {

using modes::BasisKind;
using modes::Branch;
using radial::RadialFunction;
using radial::Solution;
using specfun::FunctionPair;
using std::numbers::pi;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCutoff = 1e-16;
constexpr double kQuadratureTolerance = 1e-10;

modes::RadialWavenumber wavenumber(double energy, BasisKind kind, int j) {
  const double t = modes::transverse_eigenvalue(kind, j);
  if (energy == 1.0 && t == 1.0) return {Branch::Degenerate, 0.0};
  return modes::radial_wavenumber(energy, t);
}

// Radial factors of every channel in every region of a state.
struct Layout {
  int m = 0;
  int n = 0;
  bool ring = false;
  double a = 0.0;
  double r_in = 0.0;  // radius of the innermost region
  BasisKind inner_basis = BasisKind::ND;
  std::vector<RadialFunction> inner;
  std::vector<RadialFunction> ring_u;
  std::vector<RadialFunction> ring_v;
  std::vector<RadialFunction> outer;
};

Layout make_layout(const Geometry& geom, int m_signed, double energy, int n) {
  Layout l;
  l.m = std::abs(m_signed);
  l.n = n;
  l.a = geom.a;
  l.ring = geom.config == Config::TwoDistinct && geom.b < geom.a;
  l.r_in = l.ring ? geom.b : geom.a;
  l.inner_basis = geom.config == Config::OneWindow ? BasisKind::ND : BasisKind::NN;
  for (int j = 0; j < n; ++j) {
    l.inner.emplace_back(Solution::Regular, l.m, wavenumber(energy, l.inner_basis, j), l.r_in);
    l.outer.emplace_back(Solution::Decaying, l.m, wavenumber(energy, BasisKind::DD, j), l.a);
    if (l.ring) {
      const auto k = wavenumber(energy, BasisKind::ND, j);
      l.ring_u.emplace_back(Solution::Regular, l.m, k, geom.a);
      l.ring_v.emplace_back(Solution::Irregular, l.m, k, geom.b);
    }
  }
  return l;
}

Layout make_layout(const BoundState& s) { return make_layout(s.geom, s.m, s.raw_energy, s.truncation); }

enum class Region { Inner, Ring, Outer };

Region region_of(const Layout& l, double r, int side) {
  if (r < l.r_in || (r == l.r_in && side < 0)) return Region::Inner;
  if (l.ring && (r < l.a || (r == l.a && side < 0))) return Region::Ring;
  return Region::Outer;
}

// Transverse weights of f' and d f'/dr at radius r in one region.
struct Slice {
  BasisKind basis = BasisKind::DD;
  Eigen::VectorXd value;
  Eigen::VectorXd derivative;
  bool underflow = false;
};

Slice slice(const Layout& l, const BoundState& s, double r, Region region) {
  Slice out;
  out.value.resize(l.n);
  out.derivative.resize(l.n);
  switch (region) {
    case Region::Inner:
      out.basis = l.inner_basis;
      for (int j = 0; j < l.n; ++j) {
        const auto f = l.inner[j](r);
        out.value(j) = s.B(j) * f.value;
        out.derivative(j) = s.B(j) * f.derivative;
      }
      break;
    case Region::Ring:
      out.basis = BasisKind::ND;
      for (int j = 0; j < l.n; ++j) {
        const auto u = l.ring_u[j](r);
        const auto v = l.ring_v[j](r);
        out.value(j) = s.C(j) * u.value + s.D(j) * v.value;
        out.derivative(j) = s.C(j) * u.derivative + s.D(j) * v.derivative;
      }
      break;
    case Region::Outer: {
      out.basis = BasisKind::DD;
      const auto lead = l.outer[0](r);
      if (std::abs(lead.value) < kCutoff) {
        out.underflow = true;
        out.value.setZero();
        out.derivative.setZero();
        break;
      }
      for (int j = 0; j < l.n; ++j) {
        const auto f = j == 0 ? lead : l.outer[j](r);
        out.value(j) = s.A(j) * f.value;
        out.derivative(j) = s.A(j) * f.derivative;
      }
      break;
    }
  }
  return out;
}

double transverse_sum(BasisKind basis, const Eigen::VectorXd& w, double z) {
  double sum = 0.0;
  for (int j = 0; j < w.size(); ++j) sum += w(j) * modes::chi(basis, j, z);
  return sum;
}

// Composite Gauss-Legendre rule on [0, 1].
struct ZRule {
  std::vector<double> z;
  std::vector<double> w;
};

const ZRule& z_rule() {
  static const ZRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 10>;
    constexpr int kPanels = 200;
    ZRule r;
    const double h = 1.0 / kPanels;
    for (int p = 0; p < kPanels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
        const double x = G::abscissa()[i];
        const double wt = G::weights()[i];
        r.z.push_back(mid - 0.5 * h * x);
        r.w.push_back(0.5 * h * wt);
        r.z.push_back(mid + 0.5 * h * x);
        r.w.push_back(0.5 * h * wt);
      }
    }
    return r;
  }();
  return rule;
}

// int r R^2 dr for one channel over a region, closed form.
double inner_integral(const RadialFunction& f, double r_in) {
  const double q = f.separation_constant();
  if (q == 0.0) return r_in * r_in / (2.0 * f.order() + 2.0);
  return radial::lommel_antiderivative(f.order(), q, r_in, f(r_in));
}

double outer_integral(const RadialFunction& f, double a) {
  const double q = f.separation_constant();
  if (q == 0.0) return f.order() >= 2 ? a * a / (2.0 * f.order() - 2.0) : kInf;
  return -radial::lommel_antiderivative(f.order(), q, a, f(a));
}

double ring_integral(const Layout& l, int j, double c, double d, double b) {
  const double q = l.ring_u[j].separation_constant();
  const auto at = [&](double r) {
    const auto u = l.ring_u[j](r);
    const auto v = l.ring_v[j](r);
    return FunctionPair{c * u.value + d * v.value, c * u.derivative + d * v.derivative};
  };
  return radial::lommel_antiderivative(l.m, q, l.a, at(l.a)) -
         radial::lommel_antiderivative(l.m, q, b, at(b));
}

struct NormParts {
  double bounded = 0.0;  // r <= a
  double outer = 0.0;
};

NormParts norm_parts(const Layout& l, const Eigen::VectorXd& A, const Eigen::VectorXd& B,
                     const Eigen::VectorXd& C, const Eigen::VectorXd& D, double b) {
  NormParts p;
  for (int j = 0; j < l.n; ++j) {
    if (B(j) != 0.0) p.bounded += B(j) * B(j) * inner_integral(l.inner[j], l.r_in);
    if (l.ring) p.bounded += ring_integral(l, j, C(j), D(j), b);
    if (A(j) != 0.0) p.outer += A(j) * A(j) * outer_integral(l.outer[j], l.a);
  }
  return p;
}

template <class F>
double integrate(F f, double lo, double hi) {
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 20, kQuadratureTolerance, &error);
  if (!std::isfinite(v) || error > 1e-6 * std::abs(v) + 1e-300) {
    throw ConvergenceError(fmt::format("radial quadrature on [{}, {}] did not converge (error {:.2e})", lo, hi, error));
  }
  return v;
}

// int_a^inf r^2 R^2 dr for a decaying outer channel, with the tail beyond the
// cut bounded by monotonic e^x K_m(x).
double outer_moment(const RadialFunction& f, double a) {
  const int m = f.order();
  if (f.wavenumber().branch == Branch::Degenerate) {
    if (m < 2) return kInf;
    return a * a * a / (2.0 * m - 3.0);
  }
  const double k = f.wavenumber().kappa;
  const auto integrand = [&](double r) {
    const double v = f(r).value;
    return r * r * v * v;
  };
  double hi = a + 20.0 / k;
  double total = integrate(integrand, a, hi);
  for (int it = 0; it < 20; ++it) {
    const double v = f(hi).value;
    const double bound = v * v * (hi * hi / (2.0 * k) + hi / (2.0 * k * k) + 1.0 / (4.0 * k * k * k));
    if (bound <= 1e-12 * total) break;
    const double next = hi + 20.0 / k;
    total += integrate(integrand, hi, next);
    hi = next;
  }
  return total;
}

void apply_sign_convention(BoundState& s) {
  const Layout l = make_layout(s);
  // Probe the innermost region: at r = 0 for m = 0, otherwise at the first
  // radial antinode of the z profile with the largest magnitude.
  double probe = 0.0;
  if (l.m != 0) {
    double best = 0.0;
    double prev = 0.0;
    constexpr int kSamples = 400;
    for (int i = 1; i <= kSamples; ++i) {
      const double r = l.a * i / kSamples;
      const Slice sl = slice(l, s, r, region_of(l, r, -1));
      const double v = sl.value.cwiseAbs().maxCoeff();
      if (v < prev && prev > 0.0) break;
      prev = v;
      best = r;
    }
    probe = best;
  }
  const Slice sl = slice(l, s, probe, region_of(l, probe, -1));
  double value = 0.0;
  double magnitude = -1.0;
  for (int k = 0; k <= 50; ++k) {
    const double z = k / 50.0;
    const double v = transverse_sum(sl.basis, sl.value, z);
    if (std::abs(v) > magnitude) {
      magnitude = std::abs(v);
      value = v;
    }
  }
  if (value < 0.0) {
    s.A = -s.A;
    s.B = -s.B;
    s.C = -s.C;
    s.D = -s.D;
  }
}

}  // namespace

std::string_view to_string(TailClass c) {
  switch (c) {
    case TailClass::ResonanceM0: return "resonance_m0";
    case TailClass::MarginalM1: return "marginal_m1";
    case TailClass::BoundMge2: return "bound_mge2";
    case TailClass::Unclassified: return "unclassified";
  }
  return "?";
}

double MatchingResidual::max_value() const {
  double v = 0.0;
  for (const auto& i : interfaces) v = std::max(v, i.value_residual);
  return v;
}

double MatchingResidual::max_derivative() const {
  double v = 0.0;
  for (const auto& i : interfaces) v = std::max(v, i.derivative_residual);
  return v;
}

BoundState normalize(const matcher::NullSpaceSolution& sol) {
  BoundState s;
  s.geom = sol.geom;
  if (s.geom.config == Config::TwoDistinct && s.geom.b == s.geom.a) s.geom = Geometry::two_equal(s.geom.a);
  s.m = sol.m;
  s.n = sol.n;
  s.energy = sol.energy;
  s.raw_energy = sol.raw_energy;
  s.truncation = sol.truncation;
  const int n = sol.truncation;
  const bool ring = s.geom.config == Config::TwoDistinct;
  if (sol.A.size() != n || sol.B.size() != n || (ring && (sol.C.size() != n || sol.D.size() != n))) {
    throw DomainError("null-space solution does not carry coefficient vectors for every region");
  }
  s.A = sol.A;
  s.B = sol.B;
  s.C = ring ? sol.C : Eigen::VectorXd::Zero(n);
  s.D = ring ? sol.D : Eigen::VectorXd::Zero(n);

  const Layout l = make_layout(s);
  const NormParts p = norm_parts(l, s.A, s.B, s.C, s.D, s.geom.b);
  double total = p.bounded + p.outer;
  if (!std::isfinite(total)) {
    s.normalizable = false;
    total = p.bounded;
  }
  if (!(total > 0.0)) throw DomainError("state has zero norm");
  const double c = 1.0 / std::sqrt(2.0 * pi * total);
  s.norm_constant = c;
  s.A *= c;
  s.B *= c;
  s.C *= c;
  s.D *= c;
  apply_sign_convention(s);
  return s;
}

double analytic_norm(const BoundState& state) {
  const Layout l = make_layout(state);
  const NormParts p = norm_parts(l, state.A, state.B, state.C, state.D, state.geom.b);
  return 2.0 * pi * (p.bounded + p.outer);
}

FieldValue eval_field_tagged(const BoundState& state, double r, double z) {
  if (r < 0.0) throw DomainError("eval_field needs r >= 0");
  const Layout l = make_layout(state);
  const Slice sl = slice(l, state, r, region_of(l, r, -1));
  if (sl.underflow) return {0.0, FieldTag::Underflow};
  return {transverse_sum(sl.basis, sl.value, z), FieldTag::Ok};
}

double eval_field(const BoundState& state, double r, double z) { return eval_field_tagged(state, r, z).value; }

double eval_radial_derivative(const BoundState& state, double r, double z, int side) {
  const Layout l = make_layout(state);
  const Slice sl = slice(l, state, r, region_of(l, r, side));
  return transverse_sum(sl.basis, sl.derivative, z);
}

double leading_channel(const BoundState& state, double r) {
  const Layout l = make_layout(state);
  const Slice sl = slice(l, state, r, region_of(l, r, -1));
  if (sl.underflow) return 0.0;
  const auto& rule = z_rule();
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.z.size(); ++i) {
    sum += rule.w[i] * modes::chi(BasisKind::DD, 0, rule.z[i]) * transverse_sum(sl.basis, sl.value, rule.z[i]);
  }
  return sum;
}

double mean_radius(const BoundState& state) {
  const Layout l = make_layout(state);
  const double b = state.geom.b;
  // Channels whose share of the norm is negligible are skipped; inside
  // r <= a their share of the moment is at most a times smaller.
  const double skip = 1e-15;
  double total = 0.0;
  for (int j = 0; j < l.n; ++j) {
    const double cb = state.B(j);
    if (cb != 0.0 && cb * cb * inner_integral(l.inner[j], l.r_in) > skip) {
      const auto& f = l.inner[j];
      total += cb * cb * integrate([&](double r) {
        const double v = f(r).value;
        return r * r * v * v;
      }, 0.0, l.r_in);
    }
    if (l.ring && ring_integral(l, j, state.C(j), state.D(j), b) > skip) {
      const double c = state.C(j);
      const double d = state.D(j);
      total += integrate([&](double r) {
        const double v = c * l.ring_u[j](r).value + d * l.ring_v[j](r).value;
        return r * r * v * v;
      }, b, l.a);
    }
    const double ca = state.A(j);
    if (ca != 0.0 && ca * ca * outer_integral(l.outer[j], l.a) > skip) {
      total += ca * ca * outer_moment(l.outer[j], l.a);
    }
  }
  return 2.0 * pi * total;
}

MatchingResidual matching_residual(const BoundState& state) {
  const Layout l = make_layout(state);
  const auto& rule = z_rule();
  std::vector<double> radii;
  if (l.ring) radii.push_back(l.r_in);
  radii.push_back(l.a);
  MatchingResidual out;
  for (double r : radii) {
    const Slice in = slice(l, state, r, region_of(l, r, -1));
    const Slice ex = slice(l, state, r, region_of(l, r, +1));
    double dv = 0.0, dd = 0.0, nvi = 0.0, nvo = 0.0, ndi = 0.0, ndo = 0.0;
    for (std::size_t i = 0; i < rule.z.size(); ++i) {
      const double z = rule.z[i];
      const double w = rule.w[i];
      const double vi = transverse_sum(in.basis, in.value, z);
      const double vo = transverse_sum(ex.basis, ex.value, z);
      const double di = transverse_sum(in.basis, in.derivative, z);
      const double d_o = transverse_sum(ex.basis, ex.derivative, z);
      dv += w * (vi - vo) * (vi - vo);
      dd += w * (di - d_o) * (di - d_o);
      nvi += w * vi * vi;
      nvo += w * vo * vo;
      ndi += w * di * di;
      ndo += w * d_o * d_o;
    }
    const double nv = std::sqrt(std::max(nvi, nvo));
    const double nd = std::sqrt(std::max(ndi, ndo));
    out.interfaces.push_back({r, nv > 0.0 ? std::sqrt(dv) / nv : 0.0, nd > 0.0 ? std::sqrt(dd) / nd : 0.0});
  }
  return out;
}

FieldGrid field_grid(const BoundState& state, const GridSpec& spec) {
  if (spec.nr < 4 || spec.nz < 2) throw DomainError("field grid needs nr >= 4 and nz >= 2");
  const Layout l = make_layout(state);
  const double r_max = spec.r_max > 0.0 ? spec.r_max : std::max(2.0 * l.a, l.a + 3.0);
  if (!(r_max > l.a)) throw DomainError("field grid r_max must exceed the outer radius a");

  std::vector<double> edges{0.0};
  if (l.ring) edges.push_back(l.r_in);
  edges.push_back(l.a);
  edges.push_back(r_max);
  const int segments = static_cast<int>(edges.size()) - 1;
  std::vector<int> counts(segments);
  int used = 0;
  for (int k = 0; k < segments; ++k) {
    const double share = (edges[k + 1] - edges[k]) / r_max;
    counts[k] = std::max(3, static_cast<int>(std::lround((spec.nr - 1) * share)));
    used += counts[k];
  }
  counts[segments - 1] += (spec.nr - 1) - used;
  if (counts[segments - 1] < 2) throw DomainError("field grid nr too small for the region layout");

  FieldGrid g;
  g.geom = state.geom;
  g.energy = state.energy;
  g.m = state.m;
  g.n = state.n;
  g.r.push_back(0.0);
  for (int k = 0; k < segments; ++k) {
    for (int i = 1; i <= counts[k]; ++i) {
      const double t = (1.0 - std::cos(pi * i / counts[k])) / 2.0;
      g.r.push_back(i == counts[k] ? edges[k + 1] : edges[k] + (edges[k + 1] - edges[k]) * t);
    }
  }
  for (int k = 0; k < spec.nz; ++k) g.z.push_back(static_cast<double>(k) / (spec.nz - 1));
  g.values.resize(static_cast<Eigen::Index>(g.r.size()), spec.nz);
  g.underflow.assign(g.r.size(), false);
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    const Slice sl = slice(l, state, g.r[i], region_of(l, g.r[i], -1));
    g.underflow[i] = sl.underflow;
    for (int k = 0; k < spec.nz; ++k) {
      g.values(static_cast<Eigen::Index>(i), k) = sl.underflow ? 0.0 : transverse_sum(sl.basis, sl.value, g.z[k]);
    }
  }
  return g;
}

int radial_maxima(const BoundState& state, double z, double r_hi, int samples) {
  if (samples < 3) throw DomainError("radial_maxima needs at least 3 samples");
  const Layout l = make_layout(state);
  std::vector<double> v(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double r = r_hi * i / samples;
    const Slice sl = slice(l, state, r, region_of(l, r, -1));
    v[i] = std::abs(transverse_sum(sl.basis, sl.value, z));
  }
  int count = v[0] > v[1] ? 1 : 0;
  for (int i = 1; i < samples; ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) ++count;
  }
  return count;
}

BoundState threshold_solution(const Geometry& geom, int m, int n, int truncation) {
  const auto q = matcher::assemble_threshold(geom, m, truncation);
  auto sol = matcher::recover_coefficients(q);
  sol.n = n;
  sol.energy = 1.0;
  sol.raw_energy = 1.0;
  return normalize(sol);
}

TailFit asymptotic_tail_check(const BoundState& state, double r_lo, double r_hi) {
  TailFit fit;
  const double a = state.geom.a;
  fit.r_lo = r_lo > 0.0 ? r_lo : a + 10.0;
  fit.r_hi = r_hi > 0.0 ? r_hi : 10.0 * fit.r_lo;
  if (!(fit.r_hi > fit.r_lo && fit.r_lo > a)) throw DomainError("tail window must satisfy a < r_lo < r_hi");
  constexpr int kPoints = 24;
  std::vector<double> x, y;
  for (int i = 0; i < kPoints; ++i) {
    const double r = fit.r_lo * std::pow(fit.r_hi / fit.r_lo, static_cast<double>(i) / (kPoints - 1));
    const double f = leading_channel(state, r);
    if (!(std::abs(f) > 0.0) || !std::isfinite(std::log(std::abs(f)))) break;
    x.push_back(std::log(r));
    y.push_back(std::log(std::abs(f)));
  }
  if (x.size() < 2 || std::exp(x.back() - x.front()) < 2.0) {
    throw WindowTooShortError(fmt::format(
        "leading channel underflows before r reaches 2 r_lo = {}; tail fit window too short", 2.0 * fit.r_lo));
  }
  fit.r_hi = std::exp(x.back());
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  fit.exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double e = fit.exponent;
  if (std::abs(e) < 0.5) {
    fit.classification = TailClass::ResonanceM0;
  } else if (std::abs(e + 1.0) < 0.5) {
    fit.classification = TailClass::MarginalM1;
  } else if (e <= -1.5) {
    fit.classification = TailClass::BoundMge2;
  }
  return fit;
}

}  // namespace waveguide::states
