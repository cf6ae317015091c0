#pragma once

#include <Eigen/Dense>
#include <vector>

#include "convfem/assembly.hpp"

namespace convfem {

struct StaticProblem {
    const Mesh* mesh = nullptr;
    const ShapeTable* tables = nullptr;
    NeoHookean mat;
    DofMap dofs;
    std::vector<int> constrained;       // dof indices
    Eigen::VectorXd constrained_values; // same order
    Eigen::VectorXd f_ext;              // full-size applied load vector
};

struct StaticResult {
    Eigen::VectorXd d;
    Eigen::VectorXd residual; // f_ext - f_int at the solution
    int iterations = 0;
};

// Newton with backtracking on the potential energy, optional load stepping.
// tol is the force-residual norm on free dofs.
StaticResult static_solve(const StaticProblem& prob, double tol, int max_iters = 30,
                          int load_steps = 1);

} // namespace convfem
