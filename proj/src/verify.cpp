#include "convfem/verify.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "convfem/dynamics.hpp"
#include "convfem/meshbuild.hpp"
#include "convfem/output.hpp"
#include "convfem/scenario.hpp"
#include "convfem/statics.hpp"

namespace convfem {

namespace {

Eigen::Matrix3d random_deformation(std::mt19937& rng, int dim) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (;;) {
        Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) F(i, j) += u(rng);
        if (F.determinant() > 0.3) return F;
    }
}

Eigen::Vector3d random_parent_point(ElementKind kind, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (kind) {
    case ElementKind::line2: return {2.0 * u(rng) - 1.0, 0.0, 0.0};
    case ElementKind::quad4: return {2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0, 0.0};
    case ElementKind::tet4: {
        for (;;) {
            const double a = u(rng), b = u(rng), c = u(rng);
            if (a + b + c <= 1.0) return {a, b, c};
        }
    }
    }
    return Eigen::Vector3d::Zero();
}

struct TestSetup {
    Mesh mesh;
    ConvConfig cfg;
    BasisTable bases;
    std::string label;
};

std::vector<TestSetup> interpolation_setups(VerifyLevel level) {
    std::vector<TestSetup> out;
    {
        TestSetup t;
        t.mesh = build_bar(8);
        t.cfg = ConvConfig{1, 1.0, 2, ConvKernel::lagrange1d, 1.03};
        t.bases = BasisTable(t.mesh, t.cfg);
        t.label = "1d lagrange s=1 p=2";
        out.push_back(std::move(t));
    }
    {
        TestSetup t;
        t.mesh = build_quad_grid(5, 4, 1.0, 0.8);
        t.cfg = ConvConfig{1, 1.0, 1, ConvKernel::rbf, 1.03};
        t.bases = BasisTable(t.mesh, t.cfg);
        t.label = "2d rbf s=1 p=1";
        out.push_back(std::move(t));
    }
    if (level == VerifyLevel::full) {
        TestSetup t;
        t.mesh = build_tet_grid(3, 3, 3);
        t.cfg = ConvConfig{1, 1.0, 1, ConvKernel::rbf, 1.03};
        t.bases = BasisTable(t.mesh, t.cfg);
        t.label = "3d rbf s=1 p=1";
        out.push_back(std::move(t));
    }
    return out;
}

CheckResult check_kronecker(VerifyLevel level) {
    CheckResult r{"kronecker-delta", true, ""};
    double worst = 0.0;
    for (const TestSetup& t : interpolation_setups(level)) {
        for (int e = 0; e < t.mesh.element_count(); ++e) {
            const Element& el = t.mesh.elements[e];
            for (int a = 0; a < element_node_count(el.kind); ++a) {
                ShapeSample s = conv_sample(t.mesh, e, parent_node_coord(el.kind, a),
                                            t.bases);
                for (size_t k = 0; k < s.nodes.size(); ++k) {
                    const double expect = s.nodes[k] == el.nodes[a] ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(s.N[k] - expect));
                }
            }
        }
    }
    r.pass = worst < 1e-9;
    std::ostringstream os;
    os << "max |N - delta| = " << worst;
    r.detail = os.str();
    return r;
}

CheckResult check_reproduction(VerifyLevel level) {
    CheckResult r{"reproduction", true, ""};
    std::mt19937 rng(11);
    double worst_pu = 0.0, worst_poly = 0.0, worst_der = 0.0;
    const int samples = level == VerifyLevel::fast ? 6 : 20;
    for (const TestSetup& t : interpolation_setups(level)) {
        const int dim = t.mesh.dimension;
        for (int e = 0; e < t.mesh.element_count(); ++e) {
            for (int k = 0; k < samples; ++k) {
                ShapeSample s = conv_sample(
                    t.mesh, e, random_parent_point(t.mesh.elements[e].kind, rng), t.bases);
                worst_pu = std::max(worst_pu, std::abs(s.N.sum() - 1.0));
                // monomials up to order p
                for (int c = 0; c < dim; ++c) {
                    double lin = 0.0, quad = 0.0;
                    Eigen::VectorXd dlin = Eigen::VectorXd::Zero(dim);
                    for (size_t j = 0; j < s.nodes.size(); ++j) {
                        const double xj = t.mesh.nodes[s.nodes[j]][c];
                        lin += s.N[j] * xj;
                        quad += s.N[j] * xj * xj;
                        for (int cc = 0; cc < dim; ++cc) dlin[cc] += s.B0(cc, j) * xj;
                    }
                    worst_poly = std::max(worst_poly, std::abs(lin - s.X[c]));
                    if (t.cfg.p >= 2)
                        worst_poly = std::max(worst_poly, std::abs(quad - s.X[c] * s.X[c]));
                    for (int cc = 0; cc < dim; ++cc)
                        worst_der = std::max(
                            worst_der, std::abs(dlin[cc] - (cc == c ? 1.0 : 0.0)));
                }
            }
        }
    }
    r.pass = worst_pu < 1e-10 && worst_poly < 1e-8 && worst_der < 1e-8;
    std::ostringstream os;
    os << "partition " << worst_pu << ", polynomial " << worst_poly << ", derivative "
       << worst_der;
    r.detail = os.str();
    return r;
}

CheckResult check_fd_shape_derivatives(VerifyLevel level, const VerifyHooks& hooks) {
    CheckResult r{"fd-shape-derivatives", true, ""};
    std::mt19937 rng(23);
    double worst = 0.0;
    for (const TestSetup& t : interpolation_setups(level)) {
        const int dim = t.mesh.dimension;
        const int ne = std::min(t.mesh.element_count(), 4);
        for (int e = 0; e < ne; ++e) {
            Eigen::Vector3d xi = random_parent_point(t.mesh.elements[e].kind, rng);
            // keep clear of the element boundary so X +- h stays inside
            xi *= 0.8;
            if (t.mesh.elements[e].kind == ElementKind::tet4)
                xi = xi * 0.8 + Eigen::Vector3d(0.05, 0.05, 0.05);
            ShapeSample s = conv_sample(t.mesh, e, xi, t.bases);
            Eigen::MatrixXd B0 = s.B0;
            B0(0, 0) += hooks.b0_perturb;
            const double h = 1e-6 * characteristic_spacing(t.mesh, t.mesh.elements[e].nodes[0]);
            for (int c = 0; c < dim; ++c) {
                Eigen::Vector3d Xp = s.X, Xm = s.X;
                Xp[c] += h;
                Xm[c] -= h;
                ShapeSample sp = conv_sample(t.mesh, e, inverse_map(t.mesh, e, Xp), t.bases);
                ShapeSample sm = conv_sample(t.mesh, e, inverse_map(t.mesh, e, Xm), t.bases);
                Eigen::VectorXd fd = (sp.N - sm.N) / (2.0 * h);
                const double rel =
                    (fd - B0.row(c).transpose()).norm() / std::max(1e-12, fd.norm());
                worst = std::max(worst, rel);
            }
        }
    }
    r.pass = worst < 1e-5;
    std::ostringstream os;
    os << "max relative B0 error vs finite differences = " << worst;
    r.detail = os.str();
    return r;
}

CheckResult check_fd_material(VerifyLevel level) {
    CheckResult r{"fd-material", true, ""};
    std::mt19937 rng(31);
    const NeoHookean mat{1.3, 0.7, 1.0};
    const int count = level == VerifyLevel::fast ? 25 : 100;
    double worst_p = 0.0, worst_a = 0.0;
    for (int k = 0; k < count; ++k) {
        const Eigen::Matrix3d F = random_deformation(rng, 3);
        const double h = 1e-7;
        Eigen::Matrix3d P = pk1_stress(mat, F);
        Eigen::Matrix3d Pfd;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Eigen::Matrix3d Fp = F, Fm = F;
                Fp(i, j) += h;
                Fm(i, j) -= h;
                Pfd(i, j) = (strain_energy(mat, Fp) - strain_energy(mat, Fm)) / (2 * h);
            }
        worst_p = std::max(worst_p, (P - Pfd).norm() / Pfd.norm());

        Tangent4 A = material_tangent(mat, F);
        double num = 0.0, den = 0.0;
        for (int kk = 0; kk < 3; ++kk)
            for (int L = 0; L < 3; ++L) {
                Eigen::Matrix3d Fp = F, Fm = F;
                Fp(kk, L) += h;
                Fm(kk, L) -= h;
                Eigen::Matrix3d dP = (pk1_stress(mat, Fp) - pk1_stress(mat, Fm)) / (2 * h);
                for (int i = 0; i < 3; ++i)
                    for (int Jj = 0; Jj < 3; ++Jj) {
                        const double diff = A(i, Jj, kk, L) - dP(i, Jj);
                        num += diff * diff;
                        den += dP(i, Jj) * dP(i, Jj);
                    }
            }
        worst_a = std::max(worst_a, std::sqrt(num / den));
    }
    r.pass = worst_p < 1e-6 && worst_a < 1e-5;
    std::ostringstream os;
    os << "stress vs FD(energy) " << worst_p << ", tangent vs FD(stress) " << worst_a;
    r.detail = os.str();
    return r;
}

// Small displacement-driven system for the incremental-energy gradient check.
struct SmallDynamicSetup {
    Mesh mesh;
    NeoHookean mat{2.0e3, 2.0e-4, 100.0};
    ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};
    EnrichmentMap map;
    BasisTable bases;
    LoadCase loads;
    SolverConfig solver;
    std::unique_ptr<System> sys;

    explicit SmallDynamicSetup(bool conv_mode) {
        mesh = build_quad_grid(3, 2, 1.0, 0.6);
        map = uniform_enrichment(mesh,
                                 conv_mode ? EnrichmentMode::conv : EnrichmentMode::plain_fe,
                                 cfg);
        if (conv_mode) bases = BasisTable(mesh, cfg);
        EssentialBC fix_x, fix_y, pull;
        fix_x.nodeset = fix_y.nodeset = "bottom";
        fix_x.nodes = fix_y.nodes = mesh.nodesets["bottom"];
        fix_x.dir = 0;
        fix_y.dir = 1;
        fix_x.curve.points = fix_y.curve.points = {{0.0, 0.0}, {1.0, 0.0}};
        pull.nodeset = "top";
        pull.nodes = mesh.nodesets["top"];
        pull.dir = 1;
        pull.curve.points = {{0.0, 0.0}, {1.0, 0.05}};
        loads.essential = {fix_x, fix_y, pull};
        solver.dt = 1e-4;
        solver.steps = 10;
        sys = std::make_unique<System>(mesh, mat, map, bases, loads, solver);
    }
};

CheckResult check_fd_incremental_gradient(VerifyLevel level) {
    CheckResult r{"fd-incremental-gradient", true, ""};
    SmallDynamicSetup setup(true);
    System& sys = *setup.sys;
    Stepper stepper(sys, setup.solver);
    stepper.initialize();
    for (int k = 0; k < 3; ++k) stepper.cd_step(); // a non-trivial state

    const State& st = stepper.state();
    const double dt = setup.solver.dt;
    const int ndof = sys.dofs().ndof();
    std::mt19937 rng(47);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(ndof);
    {
        Eigen::VectorXd d_presc = st.d;
        sys.constrained_values(st.t + dt, d_presc);
        delta = d_presc - st.d;
        for (int i = 0; i < ndof; ++i)
            if (!sys.is_constrained()[i]) delta[i] = 1e-4 * gauss(rng);
    }
    IncrementalEnergy E = incremental_energy(sys, st, stepper.f_int_current(),
                                             stepper.f_ext_current(), delta, dt);

    const int dirs = level == VerifyLevel::fast ? 8 : 20;
    double worst = 0.0;
    const double h = 1e-7 * (1.0 + delta.norm());
    for (int k = 0; k < dirs; ++k) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
        for (int i = 0; i < ndof; ++i)
            if (!sys.is_constrained()[i]) u[i] = gauss(rng);
        u.normalize();
        IncrementalEnergy Ep = incremental_energy(sys, st, stepper.f_int_current(),
                                                  stepper.f_ext_current(), delta + h * u,
                                                  dt, true, false);
        IncrementalEnergy Em = incremental_energy(sys, st, stepper.f_int_current(),
                                                  stepper.f_ext_current(), delta - h * u,
                                                  dt, true, false);
        const double fd = (Ep.value - Em.value) / (2.0 * h);
        const double an = E.gradient.dot(u);
        worst = std::max(worst, std::abs(fd - an) / std::max(1e-12, std::abs(fd)));
    }
    r.pass = worst < 1e-6;
    std::ostringstream os;
    os << "max relative gradient error over " << dirs << " directions = " << worst;
    r.detail = os.str();
    return r;
}

} // namespace

PatchTestResult run_patch_test(const Mesh& mesh, EnrichmentMode mode,
                               const ConvConfig& cfg, int quad_order, int order_boost) {
    EnrichmentMap map = uniform_enrichment(mesh, mode, cfg);
    BasisTable bases;
    if (mode == EnrichmentMode::conv) bases = BasisTable(mesh, cfg);
    ShapeTable tables = build_shape_tables(mesh, map, bases, quad_order, order_boost);
    const DofMap dofs{mesh.dimension, mesh.node_count()};

    Eigen::Matrix3d Fbar = Eigen::Matrix3d::Identity();
    Fbar(0, 0) += 0.02;
    Fbar(0, 1) += 0.01;
    Fbar(1, 0) += 0.005;
    Fbar(1, 1) -= 0.015;

    StaticProblem prob;
    prob.mesh = &mesh;
    prob.tables = &tables;
    prob.mat = NeoHookean{1.0, 1.0, 1.0};
    prob.dofs = dofs;

    // essential BCs u = (Fbar - I) X on the boundary nodes
    std::vector<char> on_boundary(mesh.node_count(), 0);
    for (const char* name : {"bottom", "top", "left", "right"})
        if (mesh.nodesets.count(name))
            for (int n : mesh.nodesets.at(name)) on_boundary[n] = 1;
    std::vector<double> vals;
    for (int n = 0; n < mesh.node_count(); ++n)
        if (on_boundary[n])
            for (int c = 0; c < mesh.dimension; ++c) {
                prob.constrained.push_back(dofs(n, c));
                Eigen::Vector3d u = (Fbar - Eigen::Matrix3d::Identity()) * mesh.nodes[n];
                vals.push_back(u[c]);
            }
    prob.constrained_values =
        Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));

    // Consistent boundary traction t = P(Fbar) n. Convolution shapes of
    // interior nodes do not vanish between boundary nodes, so the constant
    // state solves the discrete equations only with this traction applied.
    prob.f_ext = Eigen::VectorXd::Zero(dofs.ndof());
    const Eigen::Matrix3d Pbar = pk1_stress(prob.mat, Fbar);
    if (mesh.facetsets.count("boundary")) {
        const int facet_order =
            quad_order > 0 ? quad_order : default_quad_order(mode, cfg) + order_boost;
        FacetTable ft = build_facet_tables(mesh, mesh.facetsets.at("boundary"), map,
                                           bases, facet_order);
        for (size_t f = 0; f < ft.facet_ids.size(); ++f) {
            const Facet& facet = mesh.facets[ft.facet_ids[f]];
            const Eigen::Vector3d tangent =
                mesh.nodes[facet.nodes[1]] - mesh.nodes[facet.nodes[0]];
            Eigen::Vector3d n{tangent[1], -tangent[0], 0.0}; // CCW outward
            n.normalize();
            const Eigen::Vector3d traction = Pbar * n;
            for (size_t q = 0; q < ft.qp[f].size(); ++q)
                for (size_t k = 0; k < ft.nodes[f].size(); ++k)
                    for (int c = 0; c < dofs.dim; ++c)
                        prob.f_ext[dofs(ft.nodes[f][k], c)] +=
                            ft.weights[f][q] * ft.qp[f][q].N[k] * traction[c];
        }
    }

    StaticResult sol = static_solve(prob, 1e-12, 40);

    PatchTestResult out;
    for (size_t e = 0; e < tables.elements.size(); ++e) {
        const ElementTable& et = tables.elements[e];
        Eigen::MatrixXd dl = gather_local(sol.d, et.nodes, dofs);
        for (const ShapeSample& s : et.qp) {
            const Eigen::Matrix3d F = deformation_gradient(s, dofs.dim, dl);
            out.max_F_error = std::max(out.max_F_error, (F - Fbar).norm());
        }
    }
    const Eigen::VectorXd r =
        internal_force(mesh, tables, prob.mat, sol.d, dofs) - prob.f_ext;
    double interior = 0.0;
    std::vector<char> mask(dofs.ndof(), 0);
    for (int i : prob.constrained) mask[i] = 1;
    for (int i = 0; i < dofs.ndof(); ++i)
        if (!mask[i]) interior += r[i] * r[i];
    // normalize by the boundary force magnitude (= the reactions the traction
    // balances)
    out.residual_ratio = std::sqrt(interior) / std::max(1e-300, prob.f_ext.norm());
    return out;
}

PatchTestResult run_hybrid_island_patch_test(int n, const ConvConfig& cfg,
                                             int order_boost) {
    Mesh mesh = build_distorted_quad_grid(n, n, 0.2, 13);
    // tag a centered island of elements as conv
    EnrichmentMap map = uniform_enrichment(mesh, EnrichmentMode::plain_fe, cfg);
    std::vector<char> island(mesh.element_count(), 0);
    for (int e = 0; e < mesh.element_count(); ++e) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int a : mesh.elements[e].nodes) c += mesh.nodes[a];
        c /= 4.0;
        if ((c - Eigen::Vector3d(0.5, 0.5, 0.0)).norm() < 0.25) {
            map.modes[e] = EnrichmentMode::conv;
            island[e] = 1;
        }
    }
    BasisTable bases(mesh, cfg, map.conv_nodes(mesh));
    ShapeTable tables = build_shape_tables(mesh, map, bases, 0, order_boost);
    const DofMap dofs{2, mesh.node_count()};

    Eigen::Matrix3d Fbar = Eigen::Matrix3d::Identity();
    Fbar(0, 0) += 0.02;
    Fbar(0, 1) += 0.01;
    Fbar(1, 0) += 0.005;
    Fbar(1, 1) -= 0.015;

    std::vector<char> on_boundary(mesh.node_count(), 0);
    for (const char* name : {"bottom", "top", "left", "right"})
        for (int nn : mesh.nodesets.at(name)) on_boundary[nn] = 1;

    StaticProblem prob;
    prob.mesh = &mesh;
    prob.tables = &tables;
    prob.mat = NeoHookean{1.0, 1.0, 1.0};
    prob.dofs = dofs;
    std::vector<double> vals;
    for (int nn = 0; nn < mesh.node_count(); ++nn)
        if (on_boundary[nn])
            for (int c = 0; c < 2; ++c) {
                prob.constrained.push_back(dofs(nn, c));
                Eigen::Vector3d u = (Fbar - Eigen::Matrix3d::Identity()) * mesh.nodes[nn];
                vals.push_back(u[c]);
            }
    prob.constrained_values =
        Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
    prob.f_ext = Eigen::VectorXd::Zero(dofs.ndof());
    StaticResult sol = static_solve(prob, 1e-12, 40);

    // nodes whose interpolation is influenced by the island
    std::vector<char> island_node(mesh.node_count(), 0);
    for (int e = 0; e < mesh.element_count(); ++e)
        if (island[e])
            for (int a : tables.elements[e].nodes) island_node[a] = 1;

    PatchTestResult out;
    for (int e = 0; e < mesh.element_count(); ++e) {
        if (island[e]) continue;
        bool touches = false;
        for (int a : tables.elements[e].nodes)
            if (island_node[a]) touches = true;
        if (touches) continue;
        const ElementTable& et = tables.elements[e];
        Eigen::MatrixXd dl = gather_local(sol.d, et.nodes, dofs);
        for (const ShapeSample& s : et.qp) {
            const Eigen::Matrix3d F = deformation_gradient(s, dofs.dim, dl);
            out.max_F_error = std::max(out.max_F_error, (F - Fbar).norm());
        }
    }
    Eigen::VectorXd f = internal_force(mesh, tables, prob.mat, sol.d, dofs);
    if (!f.allFinite()) out.residual_ratio = std::numeric_limits<double>::infinity();
    return out;
}

namespace {

CheckResult check_patch_tests(VerifyLevel level, const VerifyHooks& hooks) {
    CheckResult r{"patch-test", true, ""};
    try {
        const int n = level == VerifyLevel::fast ? 6 : 8;
        Mesh mesh = build_distorted_quad_grid(n, n, 0.2, 13);
        ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};
        PatchTestResult fem = run_patch_test(mesh, EnrichmentMode::plain_fe, cfg,
                                             hooks.quad_order_override, 0);
        PatchTestResult conv = run_patch_test(mesh, EnrichmentMode::conv, cfg,
                                              hooks.quad_order_override, 0);
        r.pass = fem.max_F_error < 1e-8 && conv.max_F_error < 1e-8 &&
                 fem.residual_ratio < 1e-8 && conv.residual_ratio < 1e-8;
        std::ostringstream os;
        os << "F error fem " << fem.max_F_error << " conv " << conv.max_F_error
           << ", residual ratio fem " << fem.residual_ratio << " conv "
           << conv.residual_ratio;
        r.detail = os.str();
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("solver failure: ") + e.what();
    }
    return r;
}

CheckResult check_degeneracy(VerifyLevel) {
    CheckResult r{"degeneracy", true, ""};
    Mesh mesh = build_quad_grid(4, 3, 1.0, 0.75);
    ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};
    const DofMap dofs{2, mesh.node_count()};
    const NeoHookean mat{1.0, 1.0, 1.0};

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    Eigen::VectorXd d(dofs.ndof());
    for (int i = 0; i < d.size(); ++i) d[i] = u(rng);

    BasisTable none;
    EnrichmentMap plain = uniform_enrichment(mesh, EnrichmentMode::plain_fe, cfg);
    ShapeTable t_plain = build_shape_tables(mesh, plain, none);
    BasisTable bases(mesh, cfg);
    EnrichmentMap conv = uniform_enrichment(mesh, EnrichmentMode::conv, cfg);
    ShapeTable t_conv = build_shape_tables(mesh, conv, bases);

    // all-plain map against direct FE sampling
    double worst_plain = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) {
        QuadratureRule rule = quadrature_rule(mesh.elements[e].kind, t_plain.quad_order_fem);
        for (int q = 0; q < rule.size(); ++q) {
            ShapeSample direct = fe_sample(mesh, e, rule.points[q]);
            worst_plain = std::max(
                worst_plain, (direct.N - t_plain.elements[e].qp[q].N).norm());
        }
    }
    Eigen::VectorXd f_plain = internal_force(mesh, t_plain, mat, d, dofs);
    Eigen::VectorXd f_conv = internal_force(mesh, t_conv, mat, d, dofs);

    // hybrid classification equivalences on assembled forces
    EnrichmentMap all_conv_by_region =
        classify_enrichment(mesh, {}, EnrichmentMode::conv, cfg);
    ShapeTable t_conv2 = build_shape_tables(mesh, all_conv_by_region, bases);
    Eigen::VectorXd f_conv2 = internal_force(mesh, t_conv2, mat, d, dofs);
    const double conv_diff = (f_conv - f_conv2).norm();

    r.pass = worst_plain == 0.0 && conv_diff <= 1e-12 * std::max(1.0, f_conv.norm()) &&
             f_conv.allFinite() && f_plain.allFinite();
    std::ostringstream os;
    os << "plain table vs direct " << worst_plain << ", all-conv force diff " << conv_diff;
    r.detail = os.str();
    return r;
}

CheckResult check_energy_balance(VerifyLevel level) {
    CheckResult r{"energy-balance", true, ""};
    Scenario sc;
    sc.name = "verify-energy";
    sc.mesh = build_notched_plate(15, 8);
    sc.mesh_path = "(built-in)";
    sc.mat = NeoHookean{115385.0, 4e-6, 1000.0};
    sc.conv = ConvConfig{1, 1.0, 1, ConvKernel::rbf, 1.03};
    sc.default_mode = EnrichmentMode::conv;
    sc.solver.dt = 1e-4;
    sc.solver.steps = level == VerifyLevel::fast ? 150 : 400;
    EssentialBC fx, fy, px, py;
    fx.nodeset = fy.nodeset = "bottom";
    fx.nodes = fy.nodes = sc.mesh.nodesets["bottom"];
    fx.dir = 0;
    fy.dir = 1;
    fx.curve.points = fy.curve.points = {{0.0, 0.0}, {1.0, 0.0}};
    px.nodeset = py.nodeset = "top";
    px.nodes = py.nodes = sc.mesh.nodesets["top"];
    px.dir = 0;
    py.dir = 1;
    px.curve.points = {{0.0, 0.0}, {0.04, 0.012}, {1.0, 0.012}};
    py.curve.points = {{0.0, 0.0}, {0.04, 0.02}, {1.0, 0.02}};
    sc.loads.essential = {fx, fy, px, py};
    std::ostringstream sink;
    RunReport rep = run_scenario(sc, sink);
    const double ratio = rep.max_abs_balance / std::max(1e-300, rep.max_energy_scale);
    r.pass = ratio <= 0.05;
    std::ostringstream os;
    os << "max |balance| / max energy = " << ratio;
    r.detail = os.str();
    return r;
}

} // namespace

std::vector<CheckResult> verify_suite(VerifyLevel level, const VerifyHooks& hooks) {
    std::vector<CheckResult> out;
    out.push_back(check_kronecker(level));
    out.push_back(check_reproduction(level));
    out.push_back(check_fd_shape_derivatives(level, hooks));
    out.push_back(check_fd_material(level));
    out.push_back(check_fd_incremental_gradient(level));
    out.push_back(check_patch_tests(level, hooks));
    out.push_back(check_degeneracy(level));
    out.push_back(check_energy_balance(level));
    return out;
}

bool print_verify_report(const std::vector<CheckResult>& results, std::ostream& os) {
    bool all = true;
    for (const CheckResult& r : results) {
        os << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << "\n";
        all = all && r.pass;
    }
    os << (all ? "all checks passed" : "CHECKS FAILED") << "\n";
    return all;
}

} // namespace convfem
