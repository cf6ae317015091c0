#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "convfem/adaptivity.hpp"
#include "convfem/interp.hpp"
#include "convfem/material.hpp"
#include "convfem/mesh.hpp"
#include "convfem/quadrature.hpp"

namespace convfem {

struct DofMap {
    int dim = 0;
    int nnodes = 0;
    int ndof() const { return dim * nnodes; }
    int operator()(int node, int dir) const { return node * dim + dir; }
};

// Precomputed shape data of one element: the patch and one sample per
// quadrature point with the integration factor folded in separately.
struct ElementTable {
    std::vector<int> nodes;        // patch node ids (all samples share them)
    std::vector<ShapeSample> qp;   // N, B0, X per point
    std::vector<double> weights;   // quadrature weight * |J| per point
    EnrichmentMode mode = EnrichmentMode::plain_fe;
};

struct ShapeTable {
    std::vector<ElementTable> elements;
    int quad_order_fem = 0;
    int quad_order_conv = 0;
};

// Default integration degree per mode; conv elements integrate rational
// patch functions and get an elevated rule.
int default_quad_order(EnrichmentMode mode, const ConvConfig& cfg);

// Precomputes shape samples for every element. `quad_order` = 0 picks the
// per-mode default; a positive value forces that degree everywhere,
// `order_boost` is added on top of either (quadrature studies).
ShapeTable build_shape_tables(const Mesh& mesh, const EnrichmentMap& map,
                              const BasisTable& bases, int quad_order = 0,
                              int order_boost = 0);

// Facet samples for traction integration: volume shape functions restricted
// to the facet, with the surface measure as weight.
struct FacetTable {
    std::vector<int> facet_ids;
    std::vector<std::vector<int>> nodes;          // per facet: patch
    std::vector<std::vector<ShapeSample>> qp;     // per facet
    std::vector<std::vector<double>> weights;     // per facet: w * |dGamma|
};

FacetTable build_facet_tables(const Mesh& mesh, const std::vector<int>& facets,
                              const EnrichmentMap& map, const BasisTable& bases,
                              int quad_order = 0);

// F = I + sum_K d_K (B0_K)^T, promoted to 3x3.
Eigen::Matrix3d deformation_gradient(const ShapeSample& sample, int dim,
                                     const Eigen::MatrixXd& d_local);

// Gathers patch-node displacements into a dim x n block.
Eigen::MatrixXd gather_local(const Eigen::VectorXd& d, const std::vector<int>& nodes,
                             const DofMap& dofs);

// Internal force per the total-Lagrangian quadrature loop. Element
// contributions are computed independently (in parallel) and reduced in
// element-id order, so the result is bit-reproducible.
Eigen::VectorXd internal_force(const Mesh& mesh, const ShapeTable& table,
                               const NeoHookean& mat, const Eigen::VectorXd& d,
                               const DofMap& dofs);

// Total strain energy of the configuration (oracle for the force gradient).
double internal_energy(const Mesh& mesh, const ShapeTable& table,
                       const NeoHookean& mat, const Eigen::VectorXd& d,
                       const DofMap& dofs);

// Tangent stiffness K = d f_int / d d (dense; meant for Newton solves on
// desk-scale meshes).
Eigen::MatrixXd tangent_stiffness(const Mesh& mesh, const ShapeTable& table,
                                  const NeoHookean& mat, const Eigen::VectorXd& d,
                                  const DofMap& dofs);

// Per-node integral of the shape functions, rho0-weighted: the spatial
// pattern of a uniform body force (one scalar per node).
Eigen::VectorXd body_force_pattern(const ShapeTable& table, double rho0, int nnodes);

// Per-node integral of shape functions over a facet set.
Eigen::VectorXd traction_pattern(const FacetTable& table, int nnodes);

// Volume integral of N rho0 b(X) for a spatially varying body force
// (manufactured solutions).
Eigen::VectorXd body_force_field(const ShapeTable& table, double rho0,
                                 const DofMap& dofs,
                                 const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& b);

// Consistent mass in node space: M_IJ = int rho0 N_I N_J. The dof-space
// operator is block diagonal per direction.
Eigen::SparseMatrix<double> consistent_mass(const ShapeTable& table, double rho0,
                                            int nnodes);

// Row-sum lumping; throws NumericalError("negative lumped mass ...") if a
// convolution row sum goes non-positive.
Eigen::VectorXd lumped_mass(const ShapeTable& table, double rho0, int nnodes);

} // namespace convfem
