#include "convfem/material.hpp"

#include <cmath>

namespace convfem {

void NeoHookean::validate() const {
    if (c10 <= 0.0 || d1 <= 0.0 || rho0 <= 0.0)
        throw ValidationError("material constants C10, D1, rho0 must all be positive");
}

double NeoHookean::wave_speed() const {
    return std::sqrt((bulk_modulus() + 4.0 * shear_modulus() / 3.0) / rho0);
}

NeoHookean from_moduli(double mu0, double k0, double rho0) {
    if (mu0 <= 0.0 || k0 <= 0.0)
        throw ValidationError("moduli mu0 and K0 must be positive");
    NeoHookean m;
    m.c10 = 0.5 * mu0;
    m.d1 = 2.0 / k0;
    m.rho0 = rho0;
    m.validate();
    return m;
}

Eigen::Matrix3d promote_plane_strain(const Eigen::MatrixXd& F, int dim) {
    Eigen::Matrix3d out = Eigen::Matrix3d::Identity();
    out.topLeftCorner(dim, dim) = F.topLeftCorner(dim, dim);
    return out;
}

namespace {
double checked_det(const Eigen::Matrix3d& F) {
    const double J = F.determinant();
    if (!(J > 0.0))
        throw NumericalError("deformation gradient has non-positive determinant (J = " +
                             std::to_string(J) + ")");
    return J;
}
} // namespace

double strain_energy(const NeoHookean& mat, const Eigen::Matrix3d& F) {
    const double J = checked_det(F);
    const double I1 = (F.transpose() * F).trace();
    const double I1bar = std::pow(J, -2.0 / 3.0) * I1;
    return mat.c10 * (I1bar - 3.0) + (1.0 / mat.d1) * (J - 1.0) * (J - 1.0);
}

Eigen::Matrix3d pk1_stress(const NeoHookean& mat, const Eigen::Matrix3d& F) {
    const double J = checked_det(F);
    const double I1 = (F.transpose() * F).trace();
    const Eigen::Matrix3d FinvT = F.inverse().transpose();
    const double Jm23 = std::pow(J, -2.0 / 3.0);
    return 2.0 * mat.c10 * Jm23 * (F - (I1 / 3.0) * FinvT) +
           (2.0 / mat.d1) * (J - 1.0) * J * FinvT;
}

Tangent4 material_tangent(const NeoHookean& mat, const Eigen::Matrix3d& F) {
    const double J = checked_det(F);
    const double I1 = (F.transpose() * F).trace();
    const Eigen::Matrix3d Finv = F.inverse();
    const Eigen::Matrix3d C = Finv.transpose(); // C_{iJ} = (F^-T)_{iJ}
    const double Jm23 = std::pow(J, -2.0 / 3.0);
    const double c10 = mat.c10;
    const double kvol = 2.0 / mat.d1;

    Tangent4 A;
    for (int i = 0; i < 3; ++i)
        for (int Jj = 0; Jj < 3; ++Jj)
            for (int k = 0; k < 3; ++k)
                for (int L = 0; L < 3; ++L) {
                    const double dC = -Finv(Jj, k) * Finv(L, i); // d(F^-T)_{iJ}/dF_{kL}
                    double t = 0.0;
                    // isochoric part
                    t += 2.0 * c10 *
                         (-(2.0 / 3.0) * Jm23 * C(k, L) *
                              (F(i, Jj) - (I1 / 3.0) * C(i, Jj)) +
                          Jm23 * ((i == k && Jj == L ? 1.0 : 0.0) -
                                  (2.0 / 3.0) * F(k, L) * C(i, Jj) -
                                  (I1 / 3.0) * dC));
                    // volumetric part
                    t += kvol * ((2.0 * J - 1.0) * J * C(k, L) * C(i, Jj) +
                                 (J - 1.0) * J * dC);
                    A(i, Jj, k, L) = t;
                }
    return A;
}

Eigen::Matrix3d cauchy_stress(const NeoHookean& mat, const Eigen::Matrix3d& F) {
    const double J = checked_det(F);
    return pk1_stress(mat, F) * F.transpose() / J;
}

double von_mises(const NeoHookean& mat, const Eigen::Matrix3d& F) {
    const Eigen::Matrix3d s = cauchy_stress(mat, F);
    const Eigen::Matrix3d dev = s - (s.trace() / 3.0) * Eigen::Matrix3d::Identity();
    return std::sqrt(1.5 * dev.squaredNorm());
}

} // namespace convfem
