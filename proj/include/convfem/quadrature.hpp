#pragma once

#include <Eigen/Dense>
#include <vector>

#include "convfem/mesh.hpp"

namespace convfem {

struct QuadratureRule {
    std::vector<Eigen::Vector3d> points; // parent coordinates
    std::vector<double> weights;         // parent measure weights
    int size() const { return static_cast<int>(points.size()); }
    double total_weight() const;
};

// Gauss-Legendre rule on [-1,1], exact for polynomials of degree 2n-1.
QuadratureRule gauss_legendre(int n);

// Rule on the parent domain of `kind`, exact for polynomials up to `order`
// total/per-direction degree. Throws on order < 1.
QuadratureRule quadrature_rule(ElementKind kind, int order);

// Rule on the parent domain of a face of `kind` (point/segment/triangle),
// expressed in the face's own parameter space.
QuadratureRule facet_quadrature_rule(ElementKind kind, int order);

} // namespace convfem
