#include "convfem/statics.hpp"

#include <cmath>

namespace convfem {

StaticResult static_solve(const StaticProblem& prob, double tol, int max_iters,
                          int load_steps) {
    const int ndof = prob.dofs.ndof();
    std::vector<char> mask(ndof, 0);
    for (int i : prob.constrained) mask[i] = 1;
    std::vector<int> free;
    for (int i = 0; i < ndof; ++i)
        if (!mask[i]) free.push_back(i);
    const int nf = static_cast<int>(free.size());

    Eigen::VectorXd d = Eigen::VectorXd::Zero(ndof);
    StaticResult out;
    out.iterations = 0;

    for (int ls = 1; ls <= load_steps; ++ls) {
        const double lambda = static_cast<double>(ls) / load_steps;
        for (size_t k = 0; k < prob.constrained.size(); ++k)
            d[prob.constrained[k]] = lambda * prob.constrained_values[k];
        const Eigen::VectorXd f_ext = lambda * prob.f_ext;

        auto potential = [&](const Eigen::VectorXd& dd) {
            return internal_energy(*prob.mesh, *prob.tables, prob.mat, dd, prob.dofs) -
                   f_ext.dot(dd);
        };

        for (int it = 0;; ++it) {
            Eigen::VectorXd r =
                f_ext - internal_force(*prob.mesh, *prob.tables, prob.mat, d, prob.dofs);
            double rn = 0.0;
            for (int i : free) rn += r[i] * r[i];
            rn = std::sqrt(rn);
            if (rn <= tol) break;
            if (it >= max_iters)
                throw NumericalError("static solve did not converge (residual " +
                                     std::to_string(rn) + ")");
            ++out.iterations;

            Eigen::MatrixXd K =
                tangent_stiffness(*prob.mesh, *prob.tables, prob.mat, d, prob.dofs);
            Eigen::MatrixXd Kff(nf, nf);
            Eigen::VectorXd rf(nf);
            for (int a = 0; a < nf; ++a) {
                rf[a] = r[free[a]];
                for (int b = 0; b < nf; ++b) Kff(a, b) = K(free[a], free[b]);
            }
            Eigen::VectorXd step = Kff.partialPivLu().solve(rf);
            if (!step.allFinite())
                throw NumericalError("singular tangent in static solve at iteration " +
                                     std::to_string(it));

            double alpha = 1.0;
            const double p0 = potential(d);
            const double slope = -rf.dot(step); // dPi/dalpha along the Newton step
            // round-off floor of the potential comparison
            const double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                                 (std::abs(p0) + std::abs(f_ext.dot(d)) + 1.0e-300);
            for (int h = 0; h < 25; ++h) {
                Eigen::VectorXd trial = d;
                for (int a = 0; a < nf; ++a) trial[free[a]] += alpha * step[a];
                bool ok = true;
                double pt = 0.0, rt = 0.0;
                try {
                    pt = potential(trial);
                    Eigen::VectorXd r_trial =
                        f_ext -
                        internal_force(*prob.mesh, *prob.tables, prob.mat, trial, prob.dofs);
                    for (int i : free) rt += r_trial[i] * r_trial[i];
                    rt = std::sqrt(rt);
                } catch (const NumericalError&) {
                    ok = false; // stepped into J <= 0, shrink
                }
                if (ok && (pt <= p0 + 1e-4 * alpha * slope + slack || rt <= 0.5 * rn)) {
                    d = std::move(trial);
                    break;
                }
                alpha *= 0.5;
                if (h == 24)
                    throw NumericalError("line search failed in static solve");
            }
        }
    }

    out.residual =
        prob.f_ext - internal_force(*prob.mesh, *prob.tables, prob.mat, d, prob.dofs);
    out.d = std::move(d);
    return out;
}

} // namespace convfem
