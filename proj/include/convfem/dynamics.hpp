#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "convfem/assembly.hpp"

namespace convfem {

// Piecewise-linear history (t, value) table; evaluation outside the covered
// interval is an error unless clamped.
struct HistoryCurve {
    std::vector<std::pair<double, double>> points;

    double t_begin() const;
    double t_end() const;
    double eval(double t) const;
    double eval_clamped(double t) const;
    void validate() const;
};

struct EssentialBC {
    std::string nodeset;
    std::vector<int> nodes;
    int dir = 0;
    HistoryCurve curve;
};

struct TractionBC {
    std::string facetset;
    std::vector<int> facets;
    int dir = 0;
    HistoryCurve curve;
};

struct BodyForceBC {
    int dir = 0;
    HistoryCurve curve;
};

struct LoadCase {
    std::vector<EssentialBC> essential;
    std::vector<TractionBC> tractions;
    std::vector<BodyForceBC> body;
    std::vector<int> monitors; // node ids

    // essential/traction dof disjointness and history coverage of [0, t_end]
    void validate(const Mesh& mesh, const DofMap& dofs, double t_end) const;
};

enum class SolverMode { explicit_cd, incremental_min };

struct SolverConfig {
    double dt = 0.0;
    int steps = 0;
    SolverMode mode = SolverMode::explicit_cd;
    double newton_tol = 1e-8; // force-residual norm (N)
    int newton_max_iters = 30;
    bool lumped_mass = true;
    int quad_order = 0; // 0 = per-mode default

    void validate() const;
};

// Marching unknowns plus accumulated work terms.
struct State {
    Eigen::VectorXd d, v, a;
    double t = 0.0;
    double w_int = 0.0;
    double w_ext = 0.0;
};

struct EnergyReport {
    double w_kin = 0.0, w_int = 0.0, w_ext = 0.0;
    double balance() const { return w_kin + w_int - w_ext; }
};

// Everything fixed over a run: mesh, tables, mass, load patterns, constraint
// layout. Owns no state.
class System {
public:
    System(const Mesh& mesh, const NeoHookean& mat, const EnrichmentMap& map,
           const BasisTable& bases, const LoadCase& loads, const SolverConfig& cfg);

    const Mesh& mesh() const { return *mesh_; }
    const DofMap& dofs() const { return dofs_; }
    const ShapeTable& tables() const { return tables_; }
    const NeoHookean& material() const { return mat_; }
    const LoadCase& loads() const { return *loads_; }
    bool lumped() const { return lumped_; }
    const Eigen::VectorXd& lumped_mass_vector() const;
    const Eigen::SparseMatrix<double>& consistent_mass_matrix() const { return mass_consistent_; }

    const std::vector<int>& constrained_dofs() const { return constrained_; }
    const std::vector<char>& is_constrained() const { return constrained_mask_; }

    Eigen::VectorXd f_int(const Eigen::VectorXd& d) const;
    Eigen::VectorXd f_ext(double t) const; // applied loads only
    Eigen::MatrixXd stiffness(const Eigen::VectorXd& d) const;

    // M * v in dof space.
    Eigen::VectorXd mass_times(const Eigen::VectorXd& v) const;
    // Solves M_ff a_f = r_f - M_fc a_c for the free accelerations, keeping
    // the constrained entries of `a` as given.
    Eigen::VectorXd solve_accelerations(const Eigen::VectorXd& r,
                                        const Eigen::VectorXd& a_constrained) const;

    // Prescribed values/velocities/accelerations at time t, stepped with dt
    // (discrete half-step kinematics so prescribed motion satisfies the same
    // update relations as free dofs).
    void constrained_values(double t, Eigen::VectorXd& d) const;
    void constrained_half_velocity(double t, double dt, Eigen::VectorXd& v) const;
    void constrained_acceleration(double t, double dt, Eigen::VectorXd& a) const;

    double total_mass() const;
    double kinetic_energy(const Eigen::VectorXd& v) const;
    // Critical time step estimate h_min / c_d.
    double dt_critical_estimate() const;

private:
    const Mesh* mesh_;
    NeoHookean mat_;
    EnrichmentMap map_;
    const LoadCase* loads_;
    DofMap dofs_;
    ShapeTable tables_;
    bool lumped_ = true;
    Eigen::VectorXd mass_lumped_;                  // node-space
    Eigen::SparseMatrix<double> mass_consistent_;  // node-space
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass_solver_; // free-free block
    Eigen::SparseMatrix<double> mass_ff_, mass_fc_;
    std::vector<int> constrained_, free_;
    std::vector<char> constrained_mask_;
    std::vector<int> free_index_; // dof -> position among free dofs, or -1

    Eigen::VectorXd body_pattern_;                       // per node
    std::vector<Eigen::VectorXd> traction_patterns_;     // per traction bc, per node

    void build_constraints();
    void build_mass();
};

// Sets constrained displacement/velocity/acceleration entries from the load
// histories at time t (finite differences of the curves with step dt).
void apply_essential_bc(State& state, const System& sys, double t, double dt);

// One central-difference step with trapezoidal work accumulation. The stepper
// caches end-of-step forces so consecutive steps reuse them.
class Stepper {
public:
    Stepper(const System& sys, const SolverConfig& cfg);

    // Initializes the state at rest (or from `initial`) and computes initial
    // accelerations from the momentum balance.
    void initialize(const std::optional<State>& initial = std::nullopt);

    void cd_step() { cd_step(cfg_.dt); }
    // Signed-dt variant (the scheme is time-reversal symmetric).
    void cd_step(double dt);
    // Incremental energy-minimization step (Newton with line search on the
    // incremental functional, started from the explicit predictor).
    void minimize_step();

    void step() {
        if (cfg_.mode == SolverMode::explicit_cd) cd_step();
        else minimize_step();
    }

    const State& state() const { return state_; }
    State& state() { return state_; }
    EnergyReport energy_report() const;

    const Eigen::VectorXd& f_int_current() const { return f_int_n_; }
    const Eigen::VectorXd& f_ext_current() const { return f_ext_n_; }

    int last_newton_iterations() const { return last_newton_iters_; }
    const std::vector<double>& last_residual_trace() const { return residual_trace_; }

private:
    const System& sys_;
    SolverConfig cfg_;
    State state_;
    Eigen::VectorXd f_int_n_, f_ext_n_, g_n_, a_n_;
    int last_newton_iters_ = 0;
    std::vector<double> residual_trace_;

    void finish_step(const Eigen::VectorXd& d_new, const Eigen::VectorXd& v_half,
                     double t_new, double dt);
};

// Incremental energy of a trial increment: trapezoidal internal/external work
// plus the kinetic difference with end-of-step velocities driven by the
// momentum balance. Returns the value and its exact gradient on free dofs
// (constrained entries zero).
struct IncrementalEnergy {
    double w_int = 0.0, w_ext = 0.0, w_kin = 0.0;
    double value = 0.0;
    Eigen::VectorXd gradient;
};

IncrementalEnergy incremental_energy(const System& sys, const State& state,
                                     const Eigen::VectorXd& f_int_n,
                                     const Eigen::VectorXd& f_ext_n,
                                     const Eigen::VectorXd& delta_d, double dt,
                                     bool with_kinetic = true,
                                     bool want_gradient = true);

} // namespace convfem
