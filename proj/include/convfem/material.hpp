#pragma once

#include <Eigen/Dense>

#include "convfem/errors.hpp"

namespace convfem {

// Neo-Hookean constants: w = C10 (Ibar1 - 3) + (1/D1)(J - 1)^2.
struct NeoHookean {
    double c10 = 0.0;  // Pa
    double d1 = 0.0;   // 1/Pa
    double rho0 = 0.0; // kg/m^3

    double shear_modulus() const { return 2.0 * c10; }
    double bulk_modulus() const { return 2.0 / d1; }
    // Dilatational wave speed for time-step estimates.
    double wave_speed() const;
    void validate() const;
};

// Small-strain-consistent conversion from initial shear/bulk moduli.
NeoHookean from_moduli(double mu0, double k0, double rho0);

// 2D deformation gradients are promoted to 3x3 with unit out-of-plane
// stretch (plane strain).
Eigen::Matrix3d promote_plane_strain(const Eigen::MatrixXd& F, int dim);

// Strain energy density. Throws NumericalError on det(F) <= 0.
double strain_energy(const NeoHookean& mat, const Eigen::Matrix3d& F);

// First Piola-Kirchhoff stress P = dw/dF (3x3).
Eigen::Matrix3d pk1_stress(const NeoHookean& mat, const Eigen::Matrix3d& F);

// Fourth-order material tangent A_{iJkL} = dP_{iJ}/dF_{kL}.
struct Tangent4 {
    double a[3][3][3][3];
    double& operator()(int i, int J, int k, int L) { return a[i][J][k][L]; }
    double operator()(int i, int J, int k, int L) const { return a[i][J][k][L]; }
};
Tangent4 material_tangent(const NeoHookean& mat, const Eigen::Matrix3d& F);

// Cauchy stress sigma = J^-1 P F^T.
Eigen::Matrix3d cauchy_stress(const NeoHookean& mat, const Eigen::Matrix3d& F);

// von Mises equivalent of the Cauchy stress (full 3x3 deviator, so plane
// strain includes the out-of-plane component).
double von_mises(const NeoHookean& mat, const Eigen::Matrix3d& F);

} // namespace convfem
