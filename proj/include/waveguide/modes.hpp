#pragma once

// Transverse eigenbases of the unit strip 0 <= z <= 1 and the overlap
// matrices between them.
//
//   DD  chi_j = sqrt2 sin((j+1) pi z)      eigenvalue (j+1)^2
//   ND  chi_j = sqrt2 cos((j+1/2) pi z)    eigenvalue (j+1/2)^2
//   NN  chi_0 = 1, chi_j = sqrt2 cos(j pi z)  eigenvalue j^2
//
// Energies are in units of (pi/d)^2 and lengths in units of d.

#include <Eigen/Dense>
#include <string_view>

namespace waveguide::modes {

enum class BasisKind { DD, ND, NN };

std::string_view to_string(BasisKind kind);

struct TransverseMode {
  BasisKind kind = BasisKind::DD;
  int j = 0;
  double eigenvalue = 0.0;
};

TransverseMode transverse_mode(BasisKind kind, int j);

double chi(BasisKind kind, int j, double z);

double transverse_eigenvalue(BasisKind kind, int j);

enum class CouplingKind { P1, P2, P3 };

std::string_view to_string(CouplingKind which);

/// Row basis is the projection basis, column basis the expansion basis:
///   P1: rows DD, columns ND
///   P2: rows DD, columns NN
///   P3: rows ND, columns NN
struct CouplingMatrix {
  CouplingKind which = CouplingKind::P1;
  Eigen::MatrixXd entries;

  int size() const { return static_cast<int>(entries.rows()); }
  double operator()(int row, int col) const { return entries(row, col); }
};

BasisKind row_basis(CouplingKind which);
BasisKind column_basis(CouplingKind which);

/// Closed-form overlap integral of chi_row (row basis) and chi_col
/// (column basis) over [0, 1].
double coupling_entry(CouplingKind which, int row, int col);

CouplingMatrix coupling_matrix(CouplingKind which, int n);

enum class Branch { Propagating, Evanescent, Degenerate };

std::string_view to_string(Branch branch);

/// pi sqrt(|E - threshold|) with the side of the threshold as a tag.
struct RadialWavenumber {
  Branch branch = Branch::Degenerate;
  double kappa = 0.0;
};

RadialWavenumber radial_wavenumber(double energy, double threshold);

namespace testing {
/// Flips the sign of every P2 entry while set; used to check that the
/// validation suites detect a corrupted coupling matrix.
void set_p2_sign_fault(bool enabled);
bool p2_sign_fault();
}  // namespace testing

}  // namespace waveguide::modes
