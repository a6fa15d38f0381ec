#include "waveguide/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "waveguide/errors.hpp"
#include "waveguide/modes.hpp"
#include "waveguide/radial.hpp"
#include "waveguide/specfun.hpp"

namespace waveguide::matcher {
namespace {

using modes::BasisKind;
using modes::Branch;
using modes::CouplingKind;
using radial::RadialFunction;
using radial::Solution;
using specfun::FunctionPair;

constexpr double kThresholdTolerance = 1e-14;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_common(int m, int n) {
  if (m < 0 || m > specfun::kMaxOrder) {
    throw DomainError(fmt::format("azimuthal order |m| must be in [0, {}], got {}", specfun::kMaxOrder, m));
  }
  if (n < 1) throw DomainError(fmt::format("truncation must be >= 1, got {}", n));
}

void check_energy(double energy) {
  if (!(energy > 0.0 && energy < 1.0)) {
    throw DomainError(fmt::format("trial energy must lie in (0, 1), got {}", energy));
  }
}

modes::RadialWavenumber wavenumber(double energy, BasisKind kind, int j, bool allow_degenerate) {
  const double t = modes::transverse_eigenvalue(kind, j);
  if (!allow_degenerate && std::abs(energy - t) < kThresholdTolerance) {
    throw DegenerateThresholdError(fmt::format(
        "E = {} coincides with the {} threshold {} of channel {}", energy, modes::to_string(kind), t, j));
  }
  if (allow_degenerate && std::abs(energy - t) < kThresholdTolerance) return {Branch::Degenerate, 0.0};
  return modes::radial_wavenumber(energy, t);
}

// Outer DD channels seen from r = a: logarithmic derivative and the log of
// the positive factor K(k a) |L| / (1 + |L|).
struct OuterChannels {
  Eigen::VectorXd log_derivative;
  Eigen::VectorXd log_scale;
};

OuterChannels outer_channels(double energy, double a, int m, int n, bool at_threshold) {
  OuterChannels out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int j = 0; j < n; ++j) {
    const auto k = wavenumber(energy, BasisKind::DD, j, at_threshold && j == 0);
    const double l = RadialFunction(Solution::Decaying, m, k, a)(a).derivative;
    out.log_derivative(j) = l;
    double log_k = 0.0;
    if (k.branch == Branch::Evanescent) log_k = std::log(specfun::bessel_k_scaled(m, k.kappa * a).value) - k.kappa * a;
    out.log_scale(j) = log_k + std::log(std::abs(l) / (1.0 + std::abs(l)));
  }
  return out;
}

// Regular inner factors at the interface radius r, plus log(1/I(k r)) on
// evanescent channels (zero otherwise).
struct InnerChannels {
  std::vector<FunctionPair> at_edge;
  Eigen::VectorXd log_scale;
};

InnerChannels inner_channels(double energy, BasisKind kind, double r, int m, int n, bool at_threshold) {
  InnerChannels out{std::vector<FunctionPair>(n), Eigen::VectorXd::Zero(n)};
  for (int j = 0; j < n; ++j) {
    const auto k = wavenumber(energy, kind, j, at_threshold);
    out.at_edge[j] = RadialFunction(Solution::Regular, m, k, r)(r);
    if (k.branch == Branch::Evanescent) {
      out.log_scale(j) = -(std::log(specfun::bessel_i_scaled(m, k.kappa * r).value) + k.kappa * r);
    }
  }
  return out;
}

double row_factor(double l) { return 1.0 / (1.0 + std::abs(l)); }

DispersionMatrix assemble_single(const Geometry& geom, double energy, int m, int n, bool at_threshold) {
  const BasisKind inner = geom.config == Config::OneWindow ? BasisKind::ND : BasisKind::NN;
  const auto p = modes::coupling_matrix(
      geom.config == Config::OneWindow ? CouplingKind::P1 : CouplingKind::P2, n);
  const auto outer = outer_channels(energy, geom.a, m, n, at_threshold);
  const auto in = inner_channels(energy, inner, geom.a, m, n, at_threshold);

  DispersionMatrix q;
  q.geom = geom;
  q.energy = energy;
  q.m = m;
  q.truncation = n;
  q.entries.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const double l = outer.log_derivative(j);
    const double f = row_factor(l);
    for (int jp = 0; jp < n; ++jp) {
      q.entries(j, jp) = (l * in.at_edge[jp].value - in.at_edge[jp].derivative) * f * p(j, jp);
    }
  }
  q.log_row_scale = outer.log_scale;
  q.log_col_scale = in.log_scale;
  return q;
}

// Everything the two-interface system is built from; shared with the
// coefficient reconstruction.
struct RingSystem {
  modes::CouplingMatrix p1;
  modes::CouplingMatrix p3;
  Eigen::VectorXd outer_l;
  std::vector<FunctionPair> ua, ub, va, vb;  // ring factors at a and b
  std::vector<FunctionPair> w;               // inner NN factors at b
  Eigen::VectorXd ring_kappa;
};

RingSystem ring_system(double energy, double a, double b, int m, int n, bool at_threshold) {
  RingSystem s{modes::coupling_matrix(CouplingKind::P1, n), modes::coupling_matrix(CouplingKind::P3, n),
               outer_channels(energy, a, m, n, at_threshold).log_derivative,
               {}, {}, {}, {}, {}, Eigen::VectorXd(n)};
  s.ua.resize(n);
  s.ub.resize(n);
  s.va.resize(n);
  s.vb.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto k = wavenumber(energy, BasisKind::ND, i, false);
    const RadialFunction u(Solution::Regular, m, k, a);
    const RadialFunction v(Solution::Irregular, m, k, b);
    s.ua[i] = u(a);
    s.ub[i] = u(b);
    s.va[i] = v(a);
    s.vb[i] = v(b);
    s.ring_kappa(i) = k.kappa;
  }
  s.w = inner_channels(energy, BasisKind::NN, b, m, n, at_threshold).at_edge;
  return s;
}

DispersionMatrix assemble_ring(const Geometry& geom, double energy, int m, int n, bool at_threshold) {
  const double a = geom.a;
  const double b = geom.b;
  const auto s = ring_system(energy, a, b, m, n, at_threshold);

  // S_reg = sum_{k >= 1} P3(:,k) lambda_k P3(:,k)^T; the k = 0 term is
  // carried by the border.
  Eigen::VectorXd lambda(n);
  for (int k = 0; k < n; ++k) lambda(k) = s.w[k].derivative / s.w[k].value;
  const Eigen::MatrixXd& p3 = s.p3.entries;
  const Eigen::MatrixXd p3_tail = p3.rightCols(n - 1);
  const Eigen::MatrixXd s_reg = p3_tail * lambda.tail(n - 1).asDiagonal() * p3_tail.transpose();
  const Eigen::VectorXd p0 = p3.col(0);
  const double w0 = s.w[0].value;
  const double w0p = s.w[0].derivative;

  const int dim = 2 * n;
  DispersionMatrix q;
  q.geom = geom;
  q.energy = energy;
  q.m = m;
  q.truncation = n;
  q.entries.resize(dim, dim);
  q.bordered = Eigen::MatrixXd::Zero(dim + 1, dim + 1);

  for (int j = 0; j < n; ++j) {
    const double l = s.outer_l(j);
    const double f = row_factor(l);
    for (int i = 0; i < n; ++i) {
      const double pc = s.p1(j, i) * f;
      q.bordered(j, i) = pc * (l * s.ua[i].value - s.ua[i].derivative);
      q.bordered(j, n + i) = pc * (l * s.va[i].value - s.va[i].derivative);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 / (1.0 + s.ring_kappa(i));
    for (int l = 0; l < n; ++l) {
      const double c = s_reg(i, l) * f;
      q.bordered(n + i, l) = c * s.ub[l].value;
      q.bordered(n + i, n + l) = c * s.vb[l].value;
    }
    q.bordered(n + i, i) -= f * s.ub[i].derivative;
    q.bordered(n + i, n + i) -= f * s.vb[i].derivative;
    q.bordered(n + i, dim) = f * w0p * p0(i);
  }
  for (int l = 0; l < n; ++l) {
    q.bordered(dim, l) = -p0(l) * s.ub[l].value;
    q.bordered(dim, n + l) = -p0(l) * s.vb[l].value;
  }
  q.bordered(dim, dim) = w0;

  q.entries = q.bordered.topLeftCorner(dim, dim);
  const double lambda0 = w0p / w0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 / (1.0 + s.ring_kappa(i));
    for (int l = 0; l < n; ++l) {
      const double c = lambda0 * p0(i) * p0(l) * f;
      q.entries(n + i, l) += c * s.ub[l].value;
      q.entries(n + i, n + l) += c * s.vb[l].value;
    }
  }
  return q;
}

DispersionMatrix assemble_any(const Geometry& geom, double energy, int m, int n, bool at_threshold) {
  geom.validate();
  check_common(m, n);
  if (geom.config == Config::TwoDistinct) {
    if (geom.b == geom.a) return assemble_single(Geometry::two_equal(geom.a), energy, m, n, at_threshold);
    return assemble_ring(geom, energy, m, n, at_threshold);
  }
  return assemble_single(geom, energy, m, n, at_threshold);
}

int first_significant(const Eigen::VectorXd& x) {
  const double cut = 1e-8 * x.cwiseAbs().maxCoeff();
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > cut) return i;
  }
  return 0;
}

NullSpaceSolution recover(const DispersionMatrix& q, bool check_degeneracy) {
  const Eigen::MatrixXd& mat = q.system();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const int last = static_cast<int>(sv.size()) - 1;
  NullSpaceSolution sol;
  sol.geom = q.geom;
  sol.m = q.m;
  sol.truncation = q.truncation;
  sol.energy = q.energy;
  sol.raw_energy = q.energy;
  sol.smallest_singular_value = sv(last);
  sol.second_singular_value = last > 0 ? sv(last - 1) : sv(last);
  sol.largest_singular_value = sv(0);
  if (check_degeneracy && last > 0 && sol.second_singular_value - sol.smallest_singular_value < 1e-3 * sv(0)) {
    throw NearDegenerateRootError(fmt::format(
        "two smallest singular values {:.3e} and {:.3e} (largest {:.3e}) at E = {} do not isolate a null vector",
        sol.smallest_singular_value, sol.second_singular_value, sv(0), q.energy));
  }
  Eigen::VectorXd x = svd.matrixV().col(last);
  if (x(first_significant(x)) < 0.0) x = -x;
  sol.residual = (mat * x).norm() / x.norm();

  const int n = q.truncation;
  const Geometry& g = q.geom;
  const bool at_threshold = q.energy == 1.0;
  if (g.config != Config::TwoDistinct || g.b == g.a) {
    const bool one = g.config == Config::OneWindow;
    const auto p = modes::coupling_matrix(one ? CouplingKind::P1 : CouplingKind::P2, n);
    const auto in = inner_channels(q.energy, one ? BasisKind::ND : BasisKind::NN, g.a, q.m, n, at_threshold);
    sol.B = x;
    Eigen::VectorXd edge(n);
    for (int j = 0; j < n; ++j) edge(j) = in.at_edge[j].value * x(j);
    sol.A = p.entries * edge;
    return sol;
  }

  const auto s = ring_system(q.energy, g.a, g.b, q.m, n, at_threshold);
  sol.C = x.head(n);
  sol.D = x.segment(n, n);
  Eigen::VectorXd phi_a(n), phi_b(n);
  for (int i = 0; i < n; ++i) {
    phi_a(i) = sol.C(i) * s.ua[i].value + sol.D(i) * s.va[i].value;
    phi_b(i) = sol.C(i) * s.ub[i].value + sol.D(i) * s.vb[i].value;
  }
  sol.A = s.p1.entries * phi_a;
  const Eigen::VectorXd projected = s.p3.entries.transpose() * phi_b;
  sol.B.resize(n);
  sol.B(0) = x(2 * n);
  for (int k = 1; k < n; ++k) sol.B(k) = projected(k) / s.w[k].value;
  return sol;
}

int sign_at(const Geometry& geom, double energy, int m, int n) {
  return det_indicator(assemble(geom, energy, m, n), false).sign;
}

double bisect(const Geometry& geom, int m, int n, double lo, double hi, int sign_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int s = sign_at(geom, mid, m, n);
    if (s == 0) return mid;
    if (s == sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Geometry routed(const Geometry& geom) {
  geom.validate();
  if (geom.config == Config::TwoDistinct && geom.b == geom.a) return Geometry::two_equal(geom.a);
  return geom;
}

// Sub-intervals of `interval` free of thresholds, shrunk by `guard`.
std::vector<EnergyInterval> pieces(const Geometry& geom, EnergyInterval interval, double guard) {
  std::vector<EnergyInterval> out;
  double lo = std::max(interval.lo, 0.0) + guard;
  const double top = std::min(interval.hi, 1.0) - guard;
  for (double t : interior_thresholds(geom, interval)) {
    if (t - guard > lo) out.push_back({lo, t - guard});
    lo = std::max(lo, t + guard);
  }
  if (top > lo) out.push_back({lo, top});
  return out;
}

EnergyInterval piece_containing(const Geometry& geom, double energy, EnergyInterval interval, double guard) {
  for (const auto& p : pieces(geom, interval, guard)) {
    if (energy >= p.lo && energy <= p.hi) return p;
  }
  return {energy, energy};
}

}  // namespace

DispersionMatrix assemble_one_window(double energy, double a, int m, int n) {
  check_energy(energy);
  return assemble_any(Geometry::one_window(a), energy, m, n, false);
}

DispersionMatrix assemble_two_equal(double energy, double a, int m, int n) {
  check_energy(energy);
  return assemble_any(Geometry::two_equal(a), energy, m, n, false);
}

DispersionMatrix assemble_two_distinct(double energy, double a, double b, int m, int n) {
  check_energy(energy);
  if (!(b > 0.0 && b < a)) {
    throw DomainError(fmt::format("two-distinct assembly needs 0 < b < a, got a={} b={}", a, b));
  }
  return assemble_any(Geometry::two_distinct(a, b), energy, m, n, false);
}

DispersionMatrix assemble(const Geometry& geom, double energy, int m, int n) {
  check_energy(energy);
  return assemble_any(geom, energy, m, n, false);
}

DispersionMatrix assemble_threshold(const Geometry& geom, int m, int n) {
  return assemble_any(geom, 1.0, m, n, true);
}

DetIndicator det_indicator(const Eigen::MatrixXd& q, bool singular_values) {
  DetIndicator out;
  const Eigen::Index n = q.rows();
  if (n == 0 || q.cols() != n) throw DomainError("det_indicator needs a nonempty square matrix");
  if (!q.allFinite()) throw DomainError("det_indicator needs a finite matrix");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(q);
  const Eigen::MatrixXd& u = lu.matrixLU();
  int sign = static_cast<int>(lu.permutationP().determinant());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = u(i, i);
    if (d == 0.0) {
      sign = 0;
      sum = -std::numeric_limits<double>::infinity();
      break;
    }
    if (d < 0.0) sign = -sign;
    sum += std::log(std::abs(d));
  }
  out.sign = sign;
  out.mean_log_abs = sum / static_cast<double>(n);
  out.value = sign == 0 ? 0.0 : sign * std::exp(out.mean_log_abs);
  if (singular_values) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(q);
    out.smallest_singular_value = svd.singularValues()(n - 1);
    out.largest_singular_value = svd.singularValues()(0);
  } else {
    out.smallest_singular_value = kNaN;
    out.largest_singular_value = kNaN;
  }
  return out;
}

DetIndicator det_indicator(const DispersionMatrix& q, bool singular_values) {
  return det_indicator(q.system(), singular_values);
}

NullSpaceSolution recover_coefficients(const DispersionMatrix& q) { return recover(q, true); }

std::vector<double> interior_thresholds(const Geometry& geom, EnergyInterval interval) {
  std::vector<double> out;
  const auto consider = [&](BasisKind kind) {
    for (int j = 0;; ++j) {
      const double t = modes::transverse_eigenvalue(kind, j);
      if (t >= interval.hi) break;
      if (t > interval.lo) out.push_back(t);
    }
  };
  consider(BasisKind::DD);
  if (geom.config != Config::TwoEqual) consider(BasisKind::ND);
  if (geom.config != Config::OneWindow) consider(BasisKind::NN);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> scan_roots(const Geometry& geom_in, int m, int n, EnergyInterval interval, double step) {
  if (!(step > 0.0)) throw DomainError("scan step must be > 0");
  const Geometry geom = routed(geom_in);
  std::vector<double> roots;
  for (const auto& p : pieces(geom, interval, 1e-9)) {
    const int count = std::max(1, static_cast<int>(std::ceil((p.hi - p.lo) / step)));
    double e_prev = p.lo;
    int s_prev = sign_at(geom, e_prev, m, n);
    for (int k = 1; k <= count; ++k) {
      const double e = k == count ? p.hi : p.lo + (p.hi - p.lo) * k / count;
      const int s = sign_at(geom, e, m, n);
      if (s == 0) {
        roots.push_back(e);
      } else if (s_prev != 0 && s != s_prev) {
        roots.push_back(bisect(geom, m, n, e_prev, e, s_prev));
      }
      e_prev = e;
      s_prev = s;
    }
  }
  return roots;
}

std::optional<double> nearest_root(const Geometry& geom_in, int m, int n, double near,
                                   EnergyInterval interval, double step, double reach) {
  const Geometry geom = routed(geom_in);
  const auto p = piece_containing(geom, near, interval, 1e-9);
  if (!(p.hi > p.lo)) return std::nullopt;
  const int s0 = sign_at(geom, near, m, n);
  if (s0 == 0) return near;
  double left = near;
  double right = near;
  int s_left = s0;
  int s_right = s0;
  const int steps = static_cast<int>(std::ceil(reach / step));
  for (int k = 1; k <= steps; ++k) {
    std::optional<double> found_left;
    std::optional<double> found_right;
    if (right < p.hi) {
      const double e = std::min(near + k * step, p.hi);
      const int s = sign_at(geom, e, m, n);
      if (s != s_right) found_right = s == 0 ? e : bisect(geom, m, n, right, e, s_right);
      right = e;
      s_right = s;
    }
    if (left > p.lo) {
      const double e = std::max(near - k * step, p.lo);
      const int s = sign_at(geom, e, m, n);
      if (s != s_left) found_left = s == 0 ? e : bisect(geom, m, n, e, left, s);
      left = e;
      s_left = s;
    }
    if (found_left && found_right) {
      return (near - *found_left) <= (*found_right - near) ? found_left : found_right;
    }
    if (found_left) return found_left;
    if (found_right) return found_right;
    if (right >= p.hi && left <= p.lo) break;
  }
  return std::nullopt;
}

double richardson_limit(std::vector<double> values) {
  if (values.empty()) throw DomainError("Richardson extrapolation needs at least one value");
  // Eliminate 1/N, then 1/N^2, ... in place.
  for (std::size_t order = 1; order < values.size(); ++order) {
    const double f = std::ldexp(1.0, static_cast<int>(order));
    for (std::size_t i = values.size() - 1; i >= order; --i) values[i] = (f * values[i] - values[i - 1]) / (f - 1.0);
  }
  return values.back();
}

std::optional<double> extrapolated_root(const Geometry& geom, int m, int n, double root, EnergyInterval interval,
                                        int levels) {
  if (levels < 1 || levels > 3) throw DomainError(fmt::format("Richardson levels must be 1, 2 or 3, got {}", levels));
  std::vector<double> table{root};
  int nt = n;
  for (int k = 0; k < levels; ++k) {
    nt *= 2;
    const auto next = nearest_root(geom, m, nt, table.back(), interval);
    if (!next) return std::nullopt;
    table.push_back(*next);
  }
  return richardson_limit(std::move(table));
}

SearchReport search_bound_states(const Geometry& geom_in, int m, int n, EnergyInterval search,
                                 const SearchOptions& options) {
  const Geometry geom = routed(geom_in);
  check_common(m, n);
  if (!(search.lo >= 0.0 && search.hi <= 1.0 && search.lo < search.hi)) {
    throw DomainError(fmt::format("search interval [{}, {}] must lie inside [0, 1]", search.lo, search.hi));
  }
  SearchReport report;
  const auto roots = scan_roots(geom, m, n, search, options.scan_step);
  for (double root : roots) {
    if (options.max_states >= 0 && static_cast<int>(report.states.size()) >= options.max_states) break;
    const auto q = assemble(geom, root, m, n);
    NullSpaceSolution sol;
    try {
      sol = recover(q, true);
    } catch (const NearDegenerateRootError& e) {
      report.warnings.push_back(e.what());
      sol = recover(q, false);
      sol.warnings.push_back(e.what());
    }
    if (sol.smallest_singular_value > options.root_acceptance * sol.largest_singular_value) {
      report.warnings.push_back(fmt::format(
          "m={}: sign change at E={} rejected, smallest singular value {:.3e} of {:.3e}", m, root,
          sol.smallest_singular_value, sol.largest_singular_value));
      continue;
    }
    if (options.extrapolate) {
      const auto extrapolated = extrapolated_root(geom, m, n, root, search, options.richardson_levels);
      if (!extrapolated) {
        report.warnings.push_back(fmt::format("m={}: root at E={} (N={}) has no partner at a doubled truncation; dropped",
                                              m, root, n));
        continue;
      }
      if (!(*extrapolated > 0.0 && *extrapolated < 1.0)) {
        report.warnings.push_back(fmt::format(
            "m={}: extrapolated energy {} from E(N={})={} is outside (0, 1); dropped", m, *extrapolated, n, root));
        continue;
      }
      sol.energy = *extrapolated;
    }
    sol.n = static_cast<int>(report.states.size());
    report.states.push_back(std::move(sol));
  }

  if (options.check_convergence && !report.states.empty()) {
    const int n2 = n + 10;
    double worst = 0.0;
    for (const auto& s : report.states) {
      const auto r1 = nearest_root(geom, m, n2, s.raw_energy, search);
      std::optional<double> e = r1;
      if (r1 && options.extrapolate) e = extrapolated_root(geom, m, n2, *r1, search, options.richardson_levels);
      if (!e) {
        report.warnings.push_back(fmt::format("m={} n={}: no matching root at N={}", m, s.n, n2));
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, std::abs(*e - s.energy));
    }
    report.convergence_delta = worst;
    if (worst > 1e-5) {
      report.warnings.push_back(fmt::format(
          "m={}: truncation not converged, a root moves by {:.3e} when N goes from {} to {}", m, worst, n, n2));
    }
  }
  return report;
}

std::vector<NullSpaceSolution> find_bound_states(const Geometry& geom, int m, int n, EnergyInterval search,
                                                 const SearchOptions& options) {
  return search_bound_states(geom, m, n, search, options).states;
}

}  // namespace waveguide::matcher
