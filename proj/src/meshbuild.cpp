#include "convfem/meshbuild.hpp"

#include <cmath>
#include <random>

namespace convfem {

Mesh build_bar(int n, double length) {
    Mesh mesh;
    mesh.dimension = 1;
    for (int i = 0; i <= n; ++i)
        mesh.nodes.push_back({length * i / n, 0.0, 0.0});
    for (int e = 0; e < n; ++e)
        mesh.elements.push_back({ElementKind::line2, {e, e + 1}});
    mesh.facets.push_back({0, 0, {}});
    mesh.facets.push_back({n - 1, 1, {}});
    mesh.nodesets["left"] = {0};
    mesh.nodesets["right"] = {n};
    mesh.facetsets["left"] = {0};
    mesh.facetsets["right"] = {1};
    mesh.finalize();
    return mesh;
}

namespace {

void grid_connectivity(Mesh& mesh, int nx, int ny) {
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.elements.push_back(
                {ElementKind::quad4, {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}});
    std::vector<int>& bottom = mesh.nodesets["bottom"];
    std::vector<int>& top = mesh.nodesets["top"];
    std::vector<int>& left = mesh.nodesets["left"];
    std::vector<int>& right = mesh.nodesets["right"];
    for (int i = 0; i <= nx; ++i) {
        bottom.push_back(id(i, 0));
        top.push_back(id(i, ny));
    }
    for (int j = 0; j <= ny; ++j) {
        left.push_back(id(0, j));
        right.push_back(id(nx, j));
    }
    auto add_facet = [&](int elem, int face, const char* set) {
        mesh.facets.push_back({elem, face, {}});
        const int id = static_cast<int>(mesh.facets.size()) - 1;
        mesh.facetsets[set].push_back(id);
        mesh.facetsets["boundary"].push_back(id);
    };
    for (int i = 0; i < nx; ++i) {
        add_facet(i, 0, "bottom");
        add_facet((ny - 1) * nx + i, 2, "top");
    }
    for (int j = 0; j < ny; ++j) {
        add_facet(j * nx, 3, "left");
        add_facet(j * nx + nx - 1, 1, "right");
    }
}

} // namespace

Mesh build_quad_grid(int nx, int ny, double lx, double ly) {
    Mesh mesh;
    mesh.dimension = 2;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.nodes.push_back({lx * i / nx, ly * j / ny, 0.0});
    grid_connectivity(mesh, nx, ny);
    mesh.finalize();
    return mesh;
}

Mesh build_distorted_quad_grid(int nx, int ny, double amount, unsigned seed) {
    Mesh mesh;
    mesh.dimension = 2;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amount, amount);
    const double hx = 1.0 / nx, hy = 1.0 / ny;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double x = hx * i, y = hy * j;
            if (i > 0 && i < nx && j > 0 && j < ny) {
                x += hx * u(rng);
                y += hy * u(rng);
            }
            mesh.nodes.push_back({x, y, 0.0});
        }
    grid_connectivity(mesh, nx, ny);
    mesh.finalize();
    return mesh;
}

Mesh build_tet_grid(int nx, int ny, int nz, double l) {
    Mesh mesh;
    mesh.dimension = 3;
    auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                mesh.nodes.push_back({l * i / nx, l * j / ny, l * k / nz});
    // Kuhn six-tet split along the 0-6 diagonal, positively oriented and
    // face-compatible across boxes
    static const int split[6][4] = {{0, 1, 2, 6}, {0, 5, 1, 6}, {0, 2, 3, 6},
                                    {0, 3, 7, 6}, {0, 4, 5, 6}, {0, 7, 4, 6}};
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int c[8] = {id(i, j, k),         id(i + 1, j, k),
                                  id(i + 1, j + 1, k), id(i, j + 1, k),
                                  id(i, j, k + 1),     id(i + 1, j, k + 1),
                                  id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)};
                for (const auto& t : split)
                    mesh.elements.push_back(
                        {ElementKind::tet4, {c[t[0]], c[t[1]], c[t[2]], c[t[3]]}});
            }
    std::vector<int>& bottom = mesh.nodesets["bottom"];
    std::vector<int>& top = mesh.nodesets["top"];
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            bottom.push_back(id(i, j, 0));
            top.push_back(id(i, j, nz));
        }
    // top facets: faces of the top-layer tets whose nodes all lie on z = l
    std::vector<int>& topf = mesh.facetsets["top"];
    for (int e = 0; e < mesh.element_count(); ++e) {
        const Element& el = mesh.elements[e];
        for (int f = 0; f < 4; ++f) {
            bool on_top = true;
            for (int a : face_local_nodes(ElementKind::tet4, f))
                if (std::abs(mesh.nodes[el.nodes[a]][2] - l) > 1e-12) on_top = false;
            if (on_top) {
                mesh.facets.push_back({e, f, {}});
                topf.push_back(static_cast<int>(mesh.facets.size()) - 1);
            }
        }
    }
    mesh.finalize();
    return mesh;
}

Mesh build_notched_plate(int nx, int ny, double width, double height, double radius,
                         double tag_radius) {
    if (ny % 2 != 0) throw ValidationError("notched plate needs an even row count");
    Mesh mesh;
    mesh.dimension = 2;
    const double yc = 0.5 * height;

    // Height-uniform parameterization of the notched left boundary: rows stay
    // evenly spaced, so refinement produces no sliver elements at the
    // arc/straight junctions.
    auto left_boundary = [&](double t) -> Eigen::Vector3d {
        const double y = height * t;
        const double dy = y - yc;
        const double x =
            std::abs(dy) < radius ? std::sqrt(radius * radius - dy * dy) : 0.0;
        return {x, y, 0.0};
    };

    for (int j = 0; j <= ny; ++j) {
        const double t = static_cast<double>(j) / ny;
        const Eigen::Vector3d L = left_boundary(t);
        const Eigen::Vector3d R{width, height * t, 0.0};
        for (int i = 0; i <= nx; ++i) {
            const double s = static_cast<double>(i) / nx;
            mesh.nodes.push_back((1.0 - s) * L + s * R);
        }
    }
    grid_connectivity(mesh, nx, ny);

    const Eigen::Vector3d center{0.0, yc, 0.0};
    for (int e = 0; e < mesh.element_count(); ++e) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int a : mesh.elements[e].nodes) c += mesh.nodes[a];
        c /= 4.0;
        if ((c - center).norm() <= tag_radius) mesh.region_tags[e] = "notch";
    }
    mesh.finalize();
    return mesh;
}

} // namespace convfem
