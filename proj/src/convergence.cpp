#include "convfem/convergence.hpp"

#include <cmath>
#include <ostream>

#include "convfem/meshbuild.hpp"
#include "convfem/statics.hpp"

namespace convfem {

StudyProblem study_problem_from_name(const std::string& name) {
    if (name == "bar1d") return StudyProblem::bar1d;
    if (name == "plate2d") return StudyProblem::plate2d;
    throw ValidationError("unknown study problem '" + name + "' (bar1d|plate2d)");
}

namespace {

constexpr double kAmp = 0.02;

Eigen::Vector3d exact_u(StudyProblem prob, const Eigen::Vector3d& X) {
    if (prob == StudyProblem::bar1d)
        return {kAmp * std::sin(M_PI * X[0]), 0.0, 0.0};
    return {kAmp * std::sin(M_PI * X[0]) * std::sin(M_PI * X[1]),
            kAmp * std::sin(M_PI * (X[0] + 0.3)) * std::cos(M_PI * X[1] * 0.5), 0.0};
}

Eigen::Matrix3d exact_F(StudyProblem prob, const Eigen::Vector3d& X) {
    Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
    if (prob == StudyProblem::bar1d) {
        F(0, 0) += kAmp * M_PI * std::cos(M_PI * X[0]);
        return F;
    }
    F(0, 0) += kAmp * M_PI * std::cos(M_PI * X[0]) * std::sin(M_PI * X[1]);
    F(0, 1) += kAmp * M_PI * std::sin(M_PI * X[0]) * std::cos(M_PI * X[1]);
    F(1, 0) += kAmp * M_PI * std::cos(M_PI * (X[0] + 0.3)) * std::cos(M_PI * X[1] * 0.5);
    F(1, 1) -= kAmp * 0.5 * M_PI * std::sin(M_PI * (X[0] + 0.3)) * std::sin(M_PI * X[1] * 0.5);
    return F;
}

// Body force of the manufactured solution: b = -(1/rho0) Div P(F*(X)),
// divergence taken by central differences of the exact stress field.
Eigen::Vector3d manufactured_body(StudyProblem prob, const NeoHookean& mat,
                                  const Eigen::Vector3d& X, int dim) {
    const double h = 1e-6;
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (int J = 0; J < dim; ++J) {
        Eigen::Vector3d Xp = X, Xm = X;
        Xp[J] += h;
        Xm[J] -= h;
        const Eigen::Matrix3d Pp = pk1_stress(mat, exact_F(prob, Xp));
        const Eigen::Matrix3d Pm = pk1_stress(mat, exact_F(prob, Xm));
        for (int i = 0; i < dim; ++i) b[i] += (Pp(i, J) - Pm(i, J)) / (2.0 * h);
    }
    return -b / mat.rho0;
}

double solve_and_measure(StudyProblem prob, int n, EnrichmentMode mode,
                         const ConvConfig& cfg_in) {
    const NeoHookean mat{0.5, 1.0, 1.0}; // mu = 1, K = 2
    ConvConfig cfg = cfg_in;
    cfg.kernel = prob == StudyProblem::bar1d ? ConvKernel::lagrange1d : ConvKernel::rbf;

    Mesh mesh = prob == StudyProblem::bar1d ? build_bar(n) : build_quad_grid(n, n);
    const int dim = mesh.dimension;
    const DofMap dofs{dim, mesh.node_count()};

    EnrichmentMap map = uniform_enrichment(mesh, mode, cfg);
    BasisTable bases;
    if (mode == EnrichmentMode::conv) bases = BasisTable(mesh, cfg);
    ShapeTable tables = build_shape_tables(mesh, map, bases);

    StaticProblem sp;
    sp.mesh = &mesh;
    sp.tables = &tables;
    sp.mat = mat;
    sp.dofs = dofs;

    // essential BCs: exact solution on the whole boundary
    std::vector<char> on_boundary(mesh.node_count(), 0);
    if (prob == StudyProblem::bar1d) {
        on_boundary[mesh.nodesets.at("left")[0]] = 1;
        on_boundary[mesh.nodesets.at("right")[0]] = 1;
    } else {
        for (const char* name : {"bottom", "top", "left", "right"})
            for (int nn : mesh.nodesets.at(name)) on_boundary[nn] = 1;
    }
    std::vector<double> vals;
    for (int nn = 0; nn < mesh.node_count(); ++nn)
        if (on_boundary[nn]) {
            const Eigen::Vector3d u = exact_u(prob, mesh.nodes[nn]);
            for (int c = 0; c < dim; ++c) {
                sp.constrained.push_back(dofs(nn, c));
                vals.push_back(u[c]);
            }
        }
    sp.constrained_values =
        Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
    sp.f_ext = body_force_field(tables, mat.rho0, dofs, [&](const Eigen::Vector3d& X) {
        return manufactured_body(prob, mat, X, dim);
    });

    StaticResult sol = static_solve(sp, 1e-11, 50, 1);

    // L2 error with an elevated rule
    ShapeTable fine = build_shape_tables(mesh, map, bases, 0, 4);
    double err2 = 0.0;
    for (size_t e = 0; e < fine.elements.size(); ++e) {
        const ElementTable& et = fine.elements[e];
        Eigen::MatrixXd dl = gather_local(sol.d, et.nodes, dofs);
        for (size_t q = 0; q < et.qp.size(); ++q) {
            const ShapeSample& s = et.qp[q];
            Eigen::Vector3d uh = Eigen::Vector3d::Zero();
            for (size_t k = 0; k < et.nodes.size(); ++k)
                uh.head(dim) += s.N[k] * dl.col(k);
            const Eigen::Vector3d du = uh - exact_u(prob, s.X);
            err2 += et.weights[q] * du.head(dim).squaredNorm();
        }
    }
    return std::sqrt(err2);
}

} // namespace

StudyResult convergence_study(StudyProblem problem, const std::vector<int>& refinements,
                              const std::vector<std::string>& modes,
                              const ConvConfig& cfg) {
    if (refinements.empty()) throw ValidationError("need at least one refinement level");
    for (size_t i = 1; i < refinements.size(); ++i)
        if (refinements[i] <= refinements[i - 1])
            throw ValidationError("refinement levels must be ascending");

    StudyResult out;
    out.problem = problem;
    for (const std::string& mode_name : modes) {
        const EnrichmentMode mode = enrichment_mode_from_name(mode_name);
        std::vector<StudyRow> rows;
        for (int n : refinements) {
            StudyRow row;
            row.n = n;
            row.h = 1.0 / n;
            try {
                row.error = solve_and_measure(problem, n, mode, cfg);
            } catch (const NumericalError&) {
                row.solved = false;
                row.error = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
        // least-squares slope of log(error) against log(h), solved rows only
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (const StudyRow& r : rows) {
            if (!r.solved || !(r.error > 0.0)) continue;
            const double x = std::log(r.h), y = std::log(r.error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        double rate = std::numeric_limits<double>::quiet_NaN();
        if (m >= 2) rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        out.modes.push_back(mode_name);
        out.rows.push_back(std::move(rows));
        out.rates.push_back(rate);
    }
    return out;
}

void print_study(const StudyResult& result, std::ostream& os) {
    os << "problem: " << (result.problem == StudyProblem::bar1d ? "bar1d" : "plate2d")
       << "\n";
    for (size_t m = 0; m < result.modes.size(); ++m) {
        os << "mode " << result.modes[m] << ":\n";
        os << "  n        h              L2 error\n";
        for (const StudyRow& r : result.rows[m]) {
            char buf[96];
            if (r.solved)
                std::snprintf(buf, sizeof buf, "  %-8d %-14.6g %-14.6g\n", r.n, r.h,
                              r.error);
            else
                std::snprintf(buf, sizeof buf, "  %-8d %-14.6g (not converged)\n", r.n,
                              r.h);
            os << buf;
        }
        if (std::isnan(result.rates[m]))
            os << "  rate: undefined (single level)\n";
        else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "  rate: %.3f\n", result.rates[m]);
            os << buf;
        }
    }
}

} // namespace convfem
