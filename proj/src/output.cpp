#include "convfem/output.hpp"

#include <cstdio>
#include <fstream>

namespace convfem {

namespace {

void qp_averages(const Mesh& mesh, const ShapeTable& table, const NeoHookean& mat,
                 const Eigen::VectorXd& d, const DofMap& dofs, int element,
                 double& vm, double& sed, double& volume) {
    const ElementTable& et = table.elements[element];
    Eigen::MatrixXd dl = gather_local(d, et.nodes, dofs);
    vm = sed = volume = 0.0;
    for (size_t q = 0; q < et.qp.size(); ++q) {
        const Eigen::Matrix3d F = deformation_gradient(et.qp[q], dofs.dim, dl);
        const double w = et.weights[q];
        vm += w * von_mises(mat, F);
        sed += w * strain_energy(mat, F);
        volume += w;
    }
}

} // namespace

FieldSnapshot recover_fields(const Mesh& mesh, const ShapeTable& table,
                             const NeoHookean& mat, const Eigen::VectorXd& d,
                             const DofMap& dofs) {
    FieldSnapshot out;
    const int ne = mesh.element_count();
    const int nn = mesh.node_count();
    out.cell_vm.setZero(ne);
    out.cell_sed.setZero(ne);
    Eigen::VectorXd vol(ne);
    for (int e = 0; e < ne; ++e) {
        double vm, sed, v;
        qp_averages(mesh, table, mat, d, dofs, e, vm, sed, v);
        out.cell_vm[e] = vm / v;
        out.cell_sed[e] = sed / v;
        vol[e] = v;
    }
    out.nodal_vm.setZero(nn);
    out.nodal_sed.setZero(nn);
    for (int n = 0; n < nn; ++n) {
        double wsum = 0.0;
        for (int e : mesh.node_elements[n]) {
            out.nodal_vm[n] += vol[e] * out.cell_vm[e];
            out.nodal_sed[n] += vol[e] * out.cell_sed[e];
            wsum += vol[e];
        }
        if (wsum > 0.0) {
            out.nodal_vm[n] /= wsum;
            out.nodal_sed[n] /= wsum;
        }
    }
    return out;
}

void nodal_stress_at(const Mesh& mesh, const ShapeTable& table, const NeoHookean& mat,
                     const Eigen::VectorXd& d, const DofMap& dofs, int node,
                     double& von_mises_out, double& energy_density_out) {
    double vm_acc = 0.0, sed_acc = 0.0, wsum = 0.0;
    for (int e : mesh.node_elements[node]) {
        double vm, sed, v;
        qp_averages(mesh, table, mat, d, dofs, e, vm, sed, v);
        vm_acc += vm;
        sed_acc += sed;
        wsum += v;
    }
    von_mises_out = wsum > 0.0 ? vm_acc / wsum : 0.0;
    energy_density_out = wsum > 0.0 ? sed_acc / wsum : 0.0;
}

void monitor_stress_at(const Mesh& mesh, const EnrichmentMap& map,
                       const BasisTable& bases, const NeoHookean& mat,
                       const Eigen::VectorXd& d, const DofMap& dofs, int node,
                       double& von_mises_out, double& energy_density_out) {
    double vm = 0.0, sed = 0.0;
    int count = 0;
    for (int e : mesh.node_elements[node]) {
        const Element& el = mesh.elements[e];
        int local = -1;
        for (int a = 0; a < element_node_count(el.kind); ++a)
            if (el.nodes[a] == node) local = a;
        const Eigen::Vector3d xi = parent_node_coord(el.kind, local);
        ShapeSample s = map.modes[e] == EnrichmentMode::conv
                            ? conv_sample(mesh, e, xi, bases)
                            : fe_sample(mesh, e, xi);
        const Eigen::Matrix3d F =
            deformation_gradient(s, dofs.dim, gather_local(d, s.nodes, dofs));
        vm += von_mises(mat, F);
        sed += strain_energy(mat, F);
        ++count;
    }
    von_mises_out = count ? vm / count : 0.0;
    energy_density_out = count ? sed / count : 0.0;
}

namespace {
int vtk_cell_type(ElementKind kind) {
    switch (kind) {
    case ElementKind::line2: return 3;
    case ElementKind::quad4: return 9;
    case ElementKind::tet4: return 10;
    }
    return 0;
}

void write_scalar_field(std::ostream& os, const char* name, const Eigen::VectorXd& f) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    char buf[64];
    for (int i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g\n", f[i]);
        os << buf;
    }
}
} // namespace

void write_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& d,
               const DofMap& dofs, const FieldSnapshot& fields, const std::string& meta) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    std::string title = meta.substr(0, 250);
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.node_count() << " double\n";
    char buf[160];
    for (int n = 0; n < mesh.node_count(); ++n) {
        std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", mesh.nodes[n][0],
                      mesh.nodes[n][1], mesh.nodes[n][2]);
        os << buf;
    }
    int list_size = 0;
    for (const Element& el : mesh.elements)
        list_size += 1 + static_cast<int>(el.nodes.size());
    os << "CELLS " << mesh.element_count() << " " << list_size << "\n";
    for (const Element& el : mesh.elements) {
        os << el.nodes.size();
        for (int a : el.nodes) os << " " << a;
        os << "\n";
    }
    os << "CELL_TYPES " << mesh.element_count() << "\n";
    for (const Element& el : mesh.elements) os << vtk_cell_type(el.kind) << "\n";

    os << "POINT_DATA " << mesh.node_count() << "\n";
    os << "VECTORS displacement double\n";
    for (int n = 0; n < mesh.node_count(); ++n) {
        double u[3] = {0, 0, 0};
        for (int c = 0; c < dofs.dim; ++c) u[c] = d[dofs(n, c)];
        std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", u[0], u[1], u[2]);
        os << buf;
    }
    write_scalar_field(os, "von_mises", fields.nodal_vm);
    write_scalar_field(os, "strain_energy_density", fields.nodal_sed);
    os << "CELL_DATA " << mesh.element_count() << "\n";
    write_scalar_field(os, "von_mises", fields.cell_vm);
    write_scalar_field(os, "strain_energy_density", fields.cell_sed);
    if (!os) throw ValidationError("write failed for '" + path + "'");
}

void CsvWriter::open(const std::string& path, const std::vector<std::string>& meta_lines,
                     const std::vector<std::string>& columns) {
    path_ = path;
    columns_ = columns.size();
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    for (const std::string& line : meta_lines) os << "# " << line << "\n";
    for (size_t i = 0; i < columns.size(); ++i)
        os << columns[i] << (i + 1 < columns.size() ? "," : "");
    os << "\n";
    if (!os) throw ValidationError("write failed for '" + path + "'");
}

void CsvWriter::append(const std::vector<double>& row) {
    if (row.size() != columns_)
        throw ValidationError("CSV row has " + std::to_string(row.size()) +
                              " values, header has " + std::to_string(columns_));
    std::string line;
    char buf[64];
    for (size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", row[i]);
        line += buf;
        if (i + 1 < row.size()) line += ',';
    }
    line += '\n';
    std::ofstream os(path_, std::ios::app);
    if (!os) throw ValidationError("cannot append to '" + path_ + "'");
    os << line; // single buffered write per row
    os.flush();
    if (!os) throw ValidationError("write failed for '" + path_ + "'");
}

} // namespace convfem
