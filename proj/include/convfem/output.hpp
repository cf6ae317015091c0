#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "convfem/assembly.hpp"

namespace convfem {

// Quadrature-point stress measures averaged per element and per node
// (volume-weighted over the elements containing the node).
struct FieldSnapshot {
    Eigen::VectorXd nodal_vm, nodal_sed;
    Eigen::VectorXd cell_vm, cell_sed;
};

FieldSnapshot recover_fields(const Mesh& mesh, const ShapeTable& table,
                             const NeoHookean& mat, const Eigen::VectorXd& d,
                             const DofMap& dofs);

// Localized recovery at a single node (per-step monitoring).
void nodal_stress_at(const Mesh& mesh, const ShapeTable& table, const NeoHookean& mat,
                     const Eigen::VectorXd& d, const DofMap& dofs, int node,
                     double& von_mises_out, double& energy_density_out);

// Pointwise nodal stress: F evaluated exactly at the node inside each
// adjacent element and averaged. No volume averaging, so values from
// different mesh resolutions are directly comparable.
void monitor_stress_at(const Mesh& mesh, const EnrichmentMap& map,
                       const BasisTable& bases, const NeoHookean& mat,
                       const Eigen::VectorXd& d, const DofMap& dofs, int node,
                       double& von_mises_out, double& energy_density_out);

// Legacy ASCII VTK unstructured grid: point displacement vectors, point and
// cell stress scalars. `meta` lands on the 256-char description line.
void write_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& d,
               const DofMap& dofs, const FieldSnapshot& fields, const std::string& meta);

// Deterministic CSV writer: '#'-prefixed metadata block, one header row, then
// rows appended one atomic write each.
class CsvWriter {
public:
    CsvWriter() = default;
    void open(const std::string& path, const std::vector<std::string>& meta_lines,
              const std::vector<std::string>& columns);
    void append(const std::vector<double>& row);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    size_t columns_ = 0;
};

} // namespace convfem
