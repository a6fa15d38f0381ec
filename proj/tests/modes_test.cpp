#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "waveguide/errors.hpp"
#include "waveguide/modes.hpp"

using namespace waveguide;
using modes::BasisKind;
using modes::CouplingKind;
using std::numbers::pi;

namespace {

// Adaptive Gauss-Kronrod on [0, 1].
double overlap(BasisKind a, int i, BasisKind b, int j) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double z) { return modes::chi(a, i, z) * modes::chi(b, j, z); }, 0.0, 1.0, 15, 1e-14);
}

constexpr BasisKind kKinds[] = {BasisKind::DD, BasisKind::ND, BasisKind::NN};
constexpr CouplingKind kCouplings[] = {CouplingKind::P1, CouplingKind::P2, CouplingKind::P3};

}  // namespace

TEST_CASE("transverse functions and eigenvalues") {
  CHECK(modes::chi(BasisKind::NN, 0, 0.3) == 1.0);
  CHECK(modes::chi(BasisKind::DD, 0, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(modes::transverse_eigenvalue(BasisKind::DD, 0) == 1.0);
  CHECK(modes::transverse_eigenvalue(BasisKind::ND, 0) == 0.25);
  CHECK(modes::transverse_eigenvalue(BasisKind::NN, 0) == 0.0);
  for (int j = 0; j < 20; ++j) {
    CHECK(modes::transverse_eigenvalue(BasisKind::DD, j) == (j + 1.0) * (j + 1.0));
    CHECK(modes::transverse_eigenvalue(BasisKind::ND, j) == (j + 0.5) * (j + 0.5));
    CHECK(modes::transverse_eigenvalue(BasisKind::NN, j) == static_cast<double>(j * j));
    CHECK(modes::transverse_mode(BasisKind::ND, j).eigenvalue == modes::transverse_eigenvalue(BasisKind::ND, j));
  }
  CHECK_THROWS_AS(modes::chi(BasisKind::DD, -1, 0.2), DomainError);
}

TEST_CASE("boundary conditions of each basis") {
  const double h = 1e-6;
  for (int j = 0; j < 10; ++j) {
    CHECK(std::abs(modes::chi(BasisKind::DD, j, 0.0)) < 1e-14);
    CHECK(std::abs(modes::chi(BasisKind::DD, j, 1.0)) < 1e-13);
    CHECK(std::abs(modes::chi(BasisKind::ND, j, 1.0)) < 1e-13);
    // One-sided slopes at the Neumann walls.
    CHECK(std::abs(modes::chi(BasisKind::ND, j, h) - modes::chi(BasisKind::ND, j, 0.0)) / h < 1e-3);
    CHECK(std::abs(modes::chi(BasisKind::NN, j, h) - modes::chi(BasisKind::NN, j, 0.0)) / h < 1e-3);
    CHECK(std::abs(modes::chi(BasisKind::NN, j, 1.0 - h) - modes::chi(BasisKind::NN, j, 1.0)) / h < 1e-3);
  }
}

TEST_CASE("eigenvalue equation -chi'' = pi^2 lambda chi") {
  const double h = 1e-4;
  for (auto kind : kKinds) {
    for (int j = 0; j < 6; ++j) {
      for (double z : {0.17, 0.5, 0.83}) {
        const double d2 =
            (modes::chi(kind, j, z + h) - 2.0 * modes::chi(kind, j, z) + modes::chi(kind, j, z - h)) / (h * h);
        const double rhs = -pi * pi * modes::transverse_eigenvalue(kind, j) * modes::chi(kind, j, z);
        CHECK(std::abs(d2 - rhs) < 1e-4 * (1.0 + std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("orthonormality by quadrature") {
  for (auto kind : kKinds) {
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        CHECK(std::abs(overlap(kind, i, kind, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("coupling matrices equal their overlap integrals") {
  for (auto which : kCouplings) {
    const auto p = modes::coupling_matrix(which, 12);
    CHECK(p.size() == 12);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        INFO(modes::to_string(which), " (", i, ", ", j, ")");
        CHECK(std::abs(p(i, j) - overlap(modes::row_basis(which), i, modes::column_basis(which), j)) < 1e-10);
      }
    }
  }
  CHECK(modes::row_basis(CouplingKind::P1) == BasisKind::DD);
  CHECK(modes::column_basis(CouplingKind::P1) == BasisKind::ND);
  CHECK(modes::row_basis(CouplingKind::P2) == BasisKind::DD);
  CHECK(modes::column_basis(CouplingKind::P2) == BasisKind::NN);
  CHECK(modes::row_basis(CouplingKind::P3) == BasisKind::ND);
  CHECK(modes::column_basis(CouplingKind::P3) == BasisKind::NN);
}

TEST_CASE("closed-form anchor entries") {
  CHECK(modes::coupling_entry(CouplingKind::P1, 0, 0) == doctest::Approx(8.0 / (3.0 * pi)).epsilon(1e-14));
  CHECK(modes::coupling_entry(CouplingKind::P2, 0, 1) == 0.0);
  CHECK(modes::coupling_entry(CouplingKind::P2, 0, 0) == doctest::Approx(2.0 * std::sqrt(2.0) / pi).epsilon(1e-14));
  // P3 rows are ND, columns NN: int sqrt2 cos(pi z / 2) dz = 2 sqrt2 / pi.
  CHECK(modes::coupling_entry(CouplingKind::P3, 0, 0) == doctest::Approx(2.0 * std::sqrt(2.0) / pi).epsilon(1e-14));
  // Row and column roles are not interchangeable.
  CHECK(std::abs(modes::coupling_entry(CouplingKind::P3, 1, 2) - overlap(BasisKind::ND, 1, BasisKind::NN, 2)) < 1e-12);
  CHECK(std::abs(modes::coupling_entry(CouplingKind::P3, 2, 1) - overlap(BasisKind::ND, 2, BasisKind::NN, 1)) < 1e-12);
}

TEST_CASE("P2 parity structure") {
  for (int j = 0; j < 60; ++j) {
    for (int k = 0; k < 60; ++k) {
      const double p = modes::coupling_entry(CouplingKind::P2, j, k);
      if (k == 0 && j % 2 == 1) CHECK(p == 0.0);
      if (k != 0 && (j + k) % 2 == 1) CHECK(p == 0.0);
      if (k == j + 1) CHECK(p == 0.0);
    }
  }
}

TEST_CASE("Parseval completeness of P1 columns") {
  const auto p = modes::coupling_matrix(CouplingKind::P1, 200);
  for (int k : {0, 1, 2}) {
    double previous = 0.0;
    for (int n : {10, 50, 200}) {
      const double sum = p.entries.col(k).head(n).squaredNorm();
      CHECK(sum > previous);
      CHECK(sum <= 1.0 + 1e-12);
      previous = sum;
    }
    CHECK(previous >= 0.99);
  }
}

TEST_CASE("injected P2 sign fault is visible to the oracle") {
  modes::testing::set_p2_sign_fault(true);
  const double faulty = modes::coupling_entry(CouplingKind::P2, 0, 0);
  modes::testing::set_p2_sign_fault(false);
  CHECK(std::abs(faulty - overlap(BasisKind::DD, 0, BasisKind::NN, 0)) > 1.0);
  CHECK(std::abs(modes::coupling_entry(CouplingKind::P2, 0, 0) - overlap(BasisKind::DD, 0, BasisKind::NN, 0)) < 1e-12);
}

TEST_CASE("radial wavenumber branches") {
  auto w = modes::radial_wavenumber(0.5, 0.25);
  CHECK(w.branch == modes::Branch::Propagating);
  CHECK(w.kappa == doctest::Approx(pi / 2.0).epsilon(1e-15));
  w = modes::radial_wavenumber(0.5, 1.0);
  CHECK(w.branch == modes::Branch::Evanescent);
  CHECK(w.kappa == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-15));
  w = modes::radial_wavenumber(1.0, 1.0);
  CHECK(w.branch == modes::Branch::Degenerate);
  CHECK(w.kappa == 0.0);
  CHECK_THROWS_AS(modes::radial_wavenumber(-0.1, 1.0), DomainError);
  CHECK_THROWS_AS(modes::coupling_matrix(CouplingKind::P1, 0), DomainError);
}
