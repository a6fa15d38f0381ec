#include "waveguide/modes.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "waveguide/errors.hpp"

namespace waveguide::modes {
namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

std::atomic<bool> g_p2_sign_fault{false};

void check_index(int j) {
  if (j < 0) throw DomainError("transverse index must be >= 0, got " + std::to_string(j));
}

double parity_sign(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// int_0^1 sqrt2 sin((j+1) pi z) sqrt2 cos((j'+1/2) pi z) dz
double p1(int j, int jp) {
  const double s = j + 1.0;
  const double t = jp + 0.5;
  return 2.0 / pi * s / (s * s - t * t);
}

// int_0^1 sqrt2 sin((j+1) pi z) chi_j'^NN(z) dz
double p2(int j, int jp) {
  if (jp == 0) return (j % 2 == 0) ? sqrt2 * 2.0 / (pi * (j + 1.0)) : 0.0;
  if ((j + jp) % 2 != 0) return 0.0;
  const double s = j + 1.0;
  return 4.0 / pi * s / (s * s - static_cast<double>(jp) * jp);
}

// int_0^1 sqrt2 cos((j+1/2) pi z) chi_k^NN(z) dz
double p3(int j, int k) {
  const double t = j + 0.5;
  if (k == 0) return parity_sign(j) * sqrt2 / (pi * t);
  return parity_sign(j + k) * 2.0 / pi * t / (t * t - static_cast<double>(k) * k);
}

}  // namespace

std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::DD: return "DD";
    case BasisKind::ND: return "ND";
    case BasisKind::NN: return "NN";
  }
  return "?";
}

std::string_view to_string(CouplingKind which) {
  switch (which) {
    case CouplingKind::P1: return "P1";
    case CouplingKind::P2: return "P2";
    case CouplingKind::P3: return "P3";
  }
  return "?";
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::Propagating: return "propagating";
    case Branch::Evanescent: return "evanescent";
    case Branch::Degenerate: return "degenerate";
  }
  return "?";
}

double chi(BasisKind kind, int j, double z) {
  check_index(j);
  switch (kind) {
    case BasisKind::DD: return sqrt2 * std::sin((j + 1.0) * pi * z);
    case BasisKind::ND: return sqrt2 * std::cos((j + 0.5) * pi * z);
    case BasisKind::NN: return j == 0 ? 1.0 : sqrt2 * std::cos(j * pi * z);
  }
  return 0.0;
}

double transverse_eigenvalue(BasisKind kind, int j) {
  check_index(j);
  switch (kind) {
    case BasisKind::DD: return (j + 1.0) * (j + 1.0);
    case BasisKind::ND: return (j + 0.5) * (j + 0.5);
    case BasisKind::NN: return static_cast<double>(j) * j;
  }
  return 0.0;
}

TransverseMode transverse_mode(BasisKind kind, int j) {
  return {kind, j, transverse_eigenvalue(kind, j)};
}

BasisKind row_basis(CouplingKind which) {
  return which == CouplingKind::P3 ? BasisKind::ND : BasisKind::DD;
}

BasisKind column_basis(CouplingKind which) {
  return which == CouplingKind::P1 ? BasisKind::ND : BasisKind::NN;
}

double coupling_entry(CouplingKind which, int row, int col) {
  check_index(row);
  check_index(col);
  switch (which) {
    case CouplingKind::P1: return p1(row, col);
    case CouplingKind::P2: return g_p2_sign_fault.load() ? -p2(row, col) : p2(row, col);
    case CouplingKind::P3: return p3(row, col);
  }
  return 0.0;
}

CouplingMatrix coupling_matrix(CouplingKind which, int n) {
  if (n < 1) throw DomainError("coupling matrix size must be >= 1");
  CouplingMatrix out{which, Eigen::MatrixXd(n, n)};
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) out.entries(j, k) = coupling_entry(which, j, k);
  }
  return out;
}

RadialWavenumber radial_wavenumber(double energy, double threshold) {
  if (energy < 0.0 || threshold < 0.0) {
    throw DomainError("radial_wavenumber needs E >= 0 and threshold >= 0");
  }
  if (energy > threshold) return {Branch::Propagating, pi * std::sqrt(energy - threshold)};
  if (energy < threshold) return {Branch::Evanescent, pi * std::sqrt(threshold - energy)};
  return {Branch::Degenerate, 0.0};
}

namespace testing {
void set_p2_sign_fault(bool enabled) { g_p2_sign_fault.store(enabled); }
bool p2_sign_fault() { return g_p2_sign_fault.load(); }
}  // namespace testing

}  // namespace waveguide::modes
