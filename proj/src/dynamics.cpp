#include "convfem/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace convfem {

double HistoryCurve::t_begin() const {
    if (points.empty()) throw ValidationError("empty history curve");
    return points.front().first;
}

double HistoryCurve::t_end() const {
    if (points.empty()) throw ValidationError("empty history curve");
    return points.back().first;
}

void HistoryCurve::validate() const {
    if (points.empty()) throw ValidationError("empty history curve");
    for (size_t i = 1; i < points.size(); ++i)
        if (points[i].first <= points[i - 1].first)
            throw ValidationError("history curve times must be strictly increasing");
}

double HistoryCurve::eval(double t) const {
    const double tol_lo = 1e-9 * (1.0 + std::abs(t_begin()));
    const double tol_hi = 1e-9 * (1.0 + std::abs(t_end()));
    if (t < t_begin() - tol_lo || t > t_end() + tol_hi)
        throw ValidationError("time " + std::to_string(t) + " outside history range [" +
                              std::to_string(t_begin()) + ", " + std::to_string(t_end()) +
                              "]");
    return eval_clamped(t);
}

double HistoryCurve::eval_clamped(double t) const {
    if (points.size() == 1) return points.front().second;
    if (t <= points.front().first) return points.front().second;
    if (t >= points.back().first) return points.back().second;
    for (size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
            const auto& [t0, v0] = points[i - 1];
            const auto& [t1, v1] = points[i];
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    return points.back().second;
}

void SolverConfig::validate() const {
    if (dt <= 0.0) throw ValidationError("time step dt must be positive");
    if (steps < 0) throw ValidationError("step count must be non-negative");
    if (newton_tol <= 0.0) throw ValidationError("newton_tol must be positive");
    if (newton_max_iters < 1) throw ValidationError("newton_max_iters must be >= 1");
}

void LoadCase::validate(const Mesh& mesh, const DofMap& dofs, double t_end) const {
    std::set<int> essential_dofs;
    for (const EssentialBC& bc : essential) {
        bc.curve.validate();
        if (bc.curve.t_begin() > 1e-12 || bc.curve.t_end() < t_end - 1e-9 * (1.0 + t_end))
            throw ValidationError("essential history on '" + bc.nodeset +
                                  "' does not cover [0, " + std::to_string(t_end) + "]");
        for (int n : bc.nodes) {
            if (n < 0 || n >= mesh.node_count())
                throw ValidationError("essential BC references missing node " +
                                      std::to_string(n));
            essential_dofs.insert(dofs(n, bc.dir));
        }
    }
    for (const TractionBC& bc : tractions) {
        bc.curve.validate();
        if (bc.curve.t_begin() > 1e-12 || bc.curve.t_end() < t_end - 1e-9 * (1.0 + t_end))
            throw ValidationError("traction history on '" + bc.facetset +
                                  "' does not cover [0, " + std::to_string(t_end) + "]");
        for (int f : bc.facets) {
            if (f < 0 || f >= static_cast<int>(mesh.facets.size()))
                throw ValidationError("traction references missing facet " +
                                      std::to_string(f));
            for (int n : mesh.facets[f].nodes)
                if (essential_dofs.count(dofs(n, bc.dir)))
                    throw ValidationError(
                        "dof (node " + std::to_string(n) + ", dir " +
                        std::to_string(bc.dir) +
                        ") carries both an essential BC and a traction");
        }
    }
    for (const BodyForceBC& bc : body) {
        bc.curve.validate();
        if (bc.curve.t_begin() > 1e-12 || bc.curve.t_end() < t_end - 1e-9 * (1.0 + t_end))
            throw ValidationError("body force history does not cover [0, " +
                                  std::to_string(t_end) + "]");
    }
    for (int n : monitors)
        if (n < 0 || n >= mesh.node_count())
            throw ValidationError("monitored node " + std::to_string(n) + " missing");
}

System::System(const Mesh& mesh, const NeoHookean& mat, const EnrichmentMap& map,
               const BasisTable& bases, const LoadCase& loads, const SolverConfig& cfg)
    : mesh_(&mesh), mat_(mat), map_(map), loads_(&loads) {
    mat_.validate();
    cfg.validate();
    dofs_ = DofMap{mesh.dimension, mesh.node_count()};
    loads.validate(mesh, dofs_, cfg.dt * cfg.steps);

    tables_ = build_shape_tables(mesh, map, bases, cfg.quad_order);
    lumped_ = cfg.lumped_mass;
    build_constraints();
    build_mass();

    body_pattern_ = body_force_pattern(tables_, mat_.rho0, mesh.node_count());
    for (const TractionBC& bc : loads.tractions) {
        FacetTable ft = build_facet_tables(mesh, bc.facets, map, bases, cfg.quad_order);
        traction_patterns_.push_back(traction_pattern(ft, mesh.node_count()));
    }
}

void System::build_constraints() {
    constrained_mask_.assign(dofs_.ndof(), 0);
    for (const EssentialBC& bc : loads_->essential)
        for (int n : bc.nodes) constrained_mask_[dofs_(n, bc.dir)] = 1;
    constrained_.clear();
    free_.clear();
    free_index_.assign(dofs_.ndof(), -1);
    for (int i = 0; i < dofs_.ndof(); ++i) {
        if (constrained_mask_[i]) constrained_.push_back(i);
        else {
            free_index_[i] = static_cast<int>(free_.size());
            free_.push_back(i);
        }
    }
}

void System::build_mass() {
    const int nn = mesh_->node_count();
    const int dim = dofs_.dim;
    if (lumped_) {
        Eigen::VectorXd m_node = lumped_mass(tables_, mat_.rho0, nn);
        mass_lumped_.resize(dofs_.ndof());
        for (int n = 0; n < nn; ++n)
            for (int c = 0; c < dim; ++c) mass_lumped_[dofs_(n, c)] = m_node[n];
        return;
    }
    Eigen::SparseMatrix<double> m_node = consistent_mass(tables_, mat_.rho0, nn);
    std::vector<Eigen::Triplet<double>> trip, trip_ff, trip_fc;
    for (int k = 0; k < m_node.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m_node, k); it; ++it)
            for (int c = 0; c < dim; ++c) {
                const int gi = dofs_(static_cast<int>(it.row()), c);
                const int gj = dofs_(static_cast<int>(it.col()), c);
                trip.emplace_back(gi, gj, it.value());
                if (!constrained_mask_[gi]) {
                    if (!constrained_mask_[gj])
                        trip_ff.emplace_back(free_index_[gi], free_index_[gj], it.value());
                    else {
                        int cj = static_cast<int>(
                            std::lower_bound(constrained_.begin(), constrained_.end(), gj) -
                            constrained_.begin());
                        trip_fc.emplace_back(free_index_[gi], cj, it.value());
                    }
                }
            }
    mass_consistent_.resize(dofs_.ndof(), dofs_.ndof());
    mass_consistent_.setFromTriplets(trip.begin(), trip.end());
    mass_ff_.resize(static_cast<int>(free_.size()), static_cast<int>(free_.size()));
    mass_ff_.setFromTriplets(trip_ff.begin(), trip_ff.end());
    mass_fc_.resize(static_cast<int>(free_.size()), static_cast<int>(constrained_.size()));
    mass_fc_.setFromTriplets(trip_fc.begin(), trip_fc.end());
    mass_solver_.compute(mass_ff_);
    if (mass_solver_.info() != Eigen::Success)
        throw NumericalError("consistent mass factorization failed");
}

const Eigen::VectorXd& System::lumped_mass_vector() const {
    if (!lumped_) throw ValidationError("system uses consistent mass");
    return mass_lumped_;
}

Eigen::VectorXd System::f_int(const Eigen::VectorXd& d) const {
    return internal_force(*mesh_, tables_, mat_, d, dofs_);
}

Eigen::VectorXd System::f_ext(double t) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs_.ndof());
    for (const BodyForceBC& bc : loads_->body) {
        const double b = bc.curve.eval_clamped(t);
        if (b == 0.0) continue;
        for (int n = 0; n < mesh_->node_count(); ++n)
            f[dofs_(n, bc.dir)] += b * body_pattern_[n];
    }
    for (size_t k = 0; k < loads_->tractions.size(); ++k) {
        const TractionBC& bc = loads_->tractions[k];
        const double tv = bc.curve.eval_clamped(t);
        if (tv == 0.0) continue;
        for (int n = 0; n < mesh_->node_count(); ++n)
            f[dofs_(n, bc.dir)] += tv * traction_patterns_[k][n];
    }
    return f;
}

Eigen::MatrixXd System::stiffness(const Eigen::VectorXd& d) const {
    return tangent_stiffness(*mesh_, tables_, mat_, d, dofs_);
}

Eigen::VectorXd System::mass_times(const Eigen::VectorXd& v) const {
    if (lumped_) return mass_lumped_.cwiseProduct(v);
    return mass_consistent_ * v;
}

Eigen::VectorXd System::solve_accelerations(const Eigen::VectorXd& r,
                                            const Eigen::VectorXd& a_constrained) const {
    Eigen::VectorXd a = a_constrained;
    if (lumped_) {
        for (int i : free_) a[i] = r[i] / mass_lumped_[i];
        return a;
    }
    Eigen::VectorXd rf(free_.size()), ac(constrained_.size());
    for (size_t k = 0; k < free_.size(); ++k) rf[k] = r[free_[k]];
    for (size_t k = 0; k < constrained_.size(); ++k) ac[k] = a_constrained[constrained_[k]];
    Eigen::VectorXd rhs = rf - mass_fc_ * ac;
    Eigen::VectorXd af = mass_solver_.solve(rhs);
    for (size_t k = 0; k < free_.size(); ++k) a[free_[k]] = af[k];
    return a;
}

void System::constrained_values(double t, Eigen::VectorXd& d) const {
    for (const EssentialBC& bc : loads_->essential) {
        const double v = bc.curve.eval_clamped(t);
        for (int n : bc.nodes) d[dofs_(n, bc.dir)] = v;
    }
}

void System::constrained_half_velocity(double t, double dt, Eigen::VectorXd& v) const {
    for (const EssentialBC& bc : loads_->essential) {
        const double val =
            (bc.curve.eval_clamped(t + dt) - bc.curve.eval_clamped(t)) / dt;
        for (int n : bc.nodes) v[dofs_(n, bc.dir)] = val;
    }
}

void System::constrained_acceleration(double t, double dt, Eigen::VectorXd& a) const {
    for (const EssentialBC& bc : loads_->essential) {
        const double val = (bc.curve.eval_clamped(t + dt) - 2.0 * bc.curve.eval_clamped(t) +
                            bc.curve.eval_clamped(t - dt)) /
                           (dt * dt);
        for (int n : bc.nodes) a[dofs_(n, bc.dir)] = val;
    }
}

double System::total_mass() const {
    if (lumped_) return mass_lumped_.sum() / dofs_.dim;
    return Eigen::MatrixXd(mass_consistent_).sum() / dofs_.dim;
}

double System::kinetic_energy(const Eigen::VectorXd& v) const {
    return 0.5 * v.dot(mass_times(v));
}

double System::dt_critical_estimate() const {
    // characteristic length = inscribed thickness (measure / longest edge),
    // which stays honest on skewed elements where the shortest edge does not
    double h_min = std::numeric_limits<double>::max();
    for (const Element& el : mesh_->elements) {
        const int nen = element_node_count(el.kind);
        double longest = 0.0;
        for (int i = 0; i < nen; ++i)
            for (int j = i + 1; j < nen; ++j)
                longest = std::max(longest, (mesh_->nodes[el.nodes[i]] -
                                             mesh_->nodes[el.nodes[j]])
                                                .norm());
        double h = longest;
        switch (el.kind) {
        case ElementKind::line2: h = longest; break;
        case ElementKind::quad4: {
            double area = 0.0;
            QuadratureRule rule = quadrature_rule(el.kind, 3);
            for (int q = 0; q < rule.size(); ++q) {
                Eigen::MatrixXd dN = fe_shape_gradients(el.kind, rule.points[q]);
                Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
                for (int a = 0; a < nen; ++a)
                    J += mesh_->nodes[el.nodes[a]].head(2) * dN.col(a).head(2).transpose();
                area += rule.weights[q] * J.determinant();
            }
            h = area / longest;
            break;
        }
        case ElementKind::tet4: {
            const Eigen::Vector3d x0 = mesh_->nodes[el.nodes[0]];
            const Eigen::Vector3d e1 = mesh_->nodes[el.nodes[1]] - x0;
            const Eigen::Vector3d e2 = mesh_->nodes[el.nodes[2]] - x0;
            const Eigen::Vector3d e3 = mesh_->nodes[el.nodes[3]] - x0;
            const double vol = e1.cross(e2).dot(e3) / 6.0;
            double a_max = 0.0;
            for (int f = 0; f < 4; ++f) {
                const std::vector<int> ln = face_local_nodes(el.kind, f);
                const Eigen::Vector3d fa = mesh_->nodes[el.nodes[ln[1]]] -
                                           mesh_->nodes[el.nodes[ln[0]]];
                const Eigen::Vector3d fb = mesh_->nodes[el.nodes[ln[2]]] -
                                           mesh_->nodes[el.nodes[ln[0]]];
                a_max = std::max(a_max, 0.5 * fa.cross(fb).norm());
            }
            h = 3.0 * vol / a_max; // smallest altitude
            break;
        }
        }
        h_min = std::min(h_min, h);
    }
    return h_min / mat_.wave_speed();
}

void apply_essential_bc(State& state, const System& sys, double t, double dt) {
    const DofMap& dofs = sys.dofs();
    for (const EssentialBC& bc : sys.loads().essential) {
        const double d = bc.curve.eval(t); // strict: errors outside the history
        const double tl = std::max(bc.curve.t_begin(), t - dt);
        const double tr = std::min(bc.curve.t_end(), t + dt);
        const double v = (bc.curve.eval_clamped(tr) - bc.curve.eval_clamped(tl)) / (tr - tl);
        const double a = (bc.curve.eval_clamped(t + dt) - 2.0 * bc.curve.eval_clamped(t) +
                          bc.curve.eval_clamped(t - dt)) /
                         (dt * dt);
        for (int n : bc.nodes) {
            state.d[dofs(n, bc.dir)] = d;
            state.v[dofs(n, bc.dir)] = v;
            state.a[dofs(n, bc.dir)] = a;
        }
    }
}

Stepper::Stepper(const System& sys, const SolverConfig& cfg) : sys_(sys), cfg_(cfg) {
    cfg_.validate();
}

void Stepper::initialize(const std::optional<State>& initial) {
    const int ndof = sys_.dofs().ndof();
    if (initial) {
        state_ = *initial;
        if (state_.d.size() != ndof)
            throw ValidationError("initial state has wrong dof count");
    } else {
        state_.d = Eigen::VectorXd::Zero(ndof);
        state_.v = Eigen::VectorXd::Zero(ndof);
        state_.a = Eigen::VectorXd::Zero(ndof);
        state_.t = 0.0;
        state_.w_int = state_.w_ext = 0.0;
    }
    const double dt = cfg_.dt;
    sys_.constrained_values(state_.t, state_.d);
    sys_.constrained_half_velocity(state_.t, dt, state_.v);
    f_int_n_ = sys_.f_int(state_.d);
    f_ext_n_ = sys_.f_ext(state_.t);
    Eigen::VectorXd a_c = Eigen::VectorXd::Zero(ndof);
    sys_.constrained_acceleration(state_.t, dt, a_c);
    state_.a = sys_.solve_accelerations(f_ext_n_ - f_int_n_, a_c);
    g_n_ = f_ext_n_;
    Eigen::VectorXd ma = sys_.mass_times(state_.a);
    for (int i : sys_.constrained_dofs()) g_n_[i] = ma[i] + f_int_n_[i];
    a_n_ = state_.a;
}

void Stepper::finish_step(const Eigen::VectorXd& d_new, const Eigen::VectorXd& v_half,
                          double t_new, double dt) {
    Eigen::VectorXd f_i = sys_.f_int(d_new);
    Eigen::VectorXd f_e = sys_.f_ext(t_new);

    Eigen::VectorXd a_new = Eigen::VectorXd::Zero(d_new.size());
    sys_.constrained_acceleration(t_new, dt, a_new);
    a_new = sys_.solve_accelerations(f_e - f_i, a_new);

    Eigen::VectorXd v_new = v_half + 0.5 * dt * a_new;

    Eigen::VectorXd g_new = f_e;
    Eigen::VectorXd ma = sys_.mass_times(a_new);
    for (int i : sys_.constrained_dofs()) g_new[i] = ma[i] + f_i[i];

    Eigen::VectorXd delta = d_new - state_.d;
    state_.w_int += 0.5 * delta.dot(f_int_n_ + f_i);
    state_.w_ext += 0.5 * delta.dot(g_n_ + g_new);

    state_.d = d_new;
    state_.v = v_new;
    state_.a = a_new;
    state_.t = t_new;
    f_int_n_ = std::move(f_i);
    f_ext_n_ = std::move(f_e);
    g_n_ = std::move(g_new);
    a_n_ = state_.a;

    if (!state_.d.allFinite() || !state_.v.allFinite() || !state_.a.allFinite())
        throw NumericalError("non-finite state at t = " + std::to_string(t_new) +
                             " (time step above the stability limit?)");
}

void Stepper::cd_step(double dt) {
    const double t_new = state_.t + dt;

    Eigen::VectorXd v_half = state_.v + 0.5 * dt * state_.a;
    sys_.constrained_half_velocity(state_.t, dt, v_half);

    Eigen::VectorXd d_new = state_.d + dt * v_half;
    sys_.constrained_values(t_new, d_new);

    finish_step(d_new, v_half, t_new, dt);
}

IncrementalEnergy incremental_energy(const System& sys, const State& state,
                                     const Eigen::VectorXd& f_int_n,
                                     const Eigen::VectorXd& f_ext_n,
                                     const Eigen::VectorXd& delta_d, double dt,
                                     bool with_kinetic, bool want_gradient) {
    const double t_new = state.t + dt;
    const Eigen::VectorXd d_new = state.d + delta_d;
    const Eigen::VectorXd f_i = sys.f_int(d_new);
    const Eigen::VectorXd f_e = sys.f_ext(t_new);

    IncrementalEnergy out;
    out.w_int = 0.5 * delta_d.dot(f_int_n + f_i);
    out.w_ext = 0.5 * delta_d.dot(f_ext_n + f_e);

    Eigen::VectorXd v_new;
    if (with_kinetic) {
        Eigen::VectorXd v_half = state.v + 0.5 * dt * state.a;
        sys.constrained_half_velocity(state.t, dt, v_half);
        Eigen::VectorXd a_new = Eigen::VectorXd::Zero(d_new.size());
        sys.constrained_acceleration(t_new, dt, a_new);
        a_new = sys.solve_accelerations(f_e - f_i, a_new);
        v_new = v_half + 0.5 * dt * a_new;
        out.w_kin = sys.kinetic_energy(v_new) - sys.kinetic_energy(state.v);
    }
    out.value = out.w_kin + out.w_int - out.w_ext;

    if (want_gradient) {
        const Eigen::MatrixXd K = sys.stiffness(d_new);
        Eigen::VectorXd g =
            0.5 * (f_int_n + f_i) + 0.5 * (K * delta_d) - 0.5 * (f_ext_n + f_e);
        if (with_kinetic) {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(d_new.size());
            Eigen::VectorXd mv = sys.mass_times(v_new);
            Eigen::VectorXd zf = sys.solve_accelerations(mv, z);
            for (int i = 0; i < zf.size(); ++i)
                if (!sys.is_constrained()[i]) z[i] = zf[i];
            g -= (0.5 * dt) * (K * z);
        }
        for (int i = 0; i < g.size(); ++i)
            if (sys.is_constrained()[i]) g[i] = 0.0;
        out.gradient = std::move(g);
    }
    return out;
}

void Stepper::minimize_step() {
    const double dt = cfg_.dt;
    const double t_new = state_.t + dt;
    const int ndof = sys_.dofs().ndof();

    Eigen::VectorXd v_half = state_.v + 0.5 * dt * state_.a;
    sys_.constrained_half_velocity(state_.t, dt, v_half);

    // Explicit predictor; constrained entries carry the prescribed increments.
    Eigen::VectorXd delta = dt * v_half;
    {
        Eigen::VectorXd d_presc = state_.d;
        sys_.constrained_values(t_new, d_presc);
        for (int i : sys_.constrained_dofs()) delta[i] = d_presc[i] - state_.d[i];
    }

    const std::vector<char>& mask = sys_.is_constrained();
    std::vector<int> free;
    for (int i = 0; i < ndof; ++i)
        if (!mask[i]) free.push_back(i);
    const int nf = static_cast<int>(free.size());

    residual_trace_.clear();
    last_newton_iters_ = 0;
    bool converged = false;

    for (int it = 0; it <= cfg_.newton_max_iters; ++it) {
        IncrementalEnergy E = incremental_energy(sys_, state_, f_int_n_, f_ext_n_, delta,
                                                 dt, true, true);
        const double res = E.gradient.norm();
        residual_trace_.push_back(res);
        if (res <= cfg_.newton_tol) {
            converged = true;
            last_newton_iters_ = it;
            break;
        }
        if (it == cfg_.newton_max_iters) break;

        // Gauss-Newton Hessian: K + (dt^2/4) K M^-1 K on free dofs.
        const Eigen::MatrixXd K = sys_.stiffness(state_.d + delta);
        Eigen::MatrixXd Kff(nf, nf);
        for (int r = 0; r < nf; ++r)
            for (int c = 0; c < nf; ++c) Kff(r, c) = K(free[r], free[c]);
        Eigen::MatrixXd MinvK(nf, nf);
        if (sys_.lumped()) {
            const Eigen::VectorXd& m = sys_.lumped_mass_vector();
            for (int r = 0; r < nf; ++r) MinvK.row(r) = Kff.row(r) / m[free[r]];
        } else {
            // Column-wise mass solves against the free-free block.
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(ndof);
            for (int c = 0; c < nf; ++c) {
                Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ndof);
                for (int r = 0; r < nf; ++r) rhs[free[r]] = Kff(r, c);
                Eigen::VectorXd sol = sys_.solve_accelerations(rhs, zero);
                for (int r = 0; r < nf; ++r) MinvK(r, c) = sol[free[r]];
            }
        }
        Eigen::MatrixXd H = Kff + (0.25 * dt * dt) * (Kff.transpose() * MinvK);

        Eigen::VectorXd gf(nf);
        for (int r = 0; r < nf; ++r) gf[r] = E.gradient[free[r]];
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step_f = ldlt.solve(-gf);
        if (ldlt.info() != Eigen::Success || !step_f.allFinite())
            throw NumericalError("singular incremental tangent at iteration " +
                                 std::to_string(it));

        // Backtracking line search on the incremental energy.
        const double slope = gf.dot(step_f);
        double alpha = 1.0;
        const double f0 = E.value;
        bool accepted = false;
        for (int h = 0; h < 20 && !accepted; ++h) {
            Eigen::VectorXd trial = delta;
            for (int r = 0; r < nf; ++r) trial[free[r]] += alpha * step_f[r];
            IncrementalEnergy Et = incremental_energy(sys_, state_, f_int_n_, f_ext_n_,
                                                      trial, dt, true, false);
            if (Et.value <= f0 + 1e-4 * alpha * slope) {
                delta = std::move(trial);
                accepted = true;
            } else {
                alpha *= 0.5;
            }
        }
        if (!accepted)
            throw NumericalError("line search failed at iteration " + std::to_string(it));
        last_newton_iters_ = it + 1;
    }

    if (!converged)
        throw NumericalError("incremental minimization did not converge in " +
                             std::to_string(cfg_.newton_max_iters) +
                             " iterations (residual " +
                             std::to_string(residual_trace_.back()) + ")");

    finish_step(state_.d + delta, v_half, t_new, dt);
}

EnergyReport Stepper::energy_report() const {
    EnergyReport r;
    r.w_kin = sys_.kinetic_energy(state_.v);
    r.w_int = state_.w_int;
    r.w_ext = state_.w_ext;
    return r;
}

} // namespace convfem
