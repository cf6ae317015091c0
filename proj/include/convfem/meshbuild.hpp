#pragma once

#include "convfem/mesh.hpp"

namespace convfem {

// Structured meshes used by the built-in verification, convergence and
// benchmark machinery. Nodesets "left"/"right" (1D), "bottom"/"top"/...
// (2D/3D) are always attached.

// 1D bar [0, length] with n line2 elements.
Mesh build_bar(int n, double length = 1.0);

// Structured quad grid on [0,lx] x [0,ly], nx x ny elements. Nodesets
// bottom/top/left/right; facetset "top" on the top edge.
Mesh build_quad_grid(int nx, int ny, double lx = 1.0, double ly = 1.0);

// Same grid with interior nodes perturbed by +-amount*h (deterministic,
// seeded); stays non-inverted for amount <= 0.3.
Mesh build_distorted_quad_grid(int nx, int ny, double amount, unsigned seed = 7);

// Cube [0,l]^3 as nx*ny*nz boxes split into 6 tets each. Nodesets
// bottom/top; facetset "top".
Mesh build_tet_grid(int nx, int ny, int nz, double l = 1.0);

// Rectangular plate with a semicircular edge notch, meshed by lateral
// blending of a 30-ish x 16-ish grid onto the notched boundary. The notch
// sits on the left edge, centered at mid height. Elements near the notch are
// tagged "notch"; nodesets bottom/top; facetset "top"; the node at the notch
// tip lies exactly at (radius, height/2).
Mesh build_notched_plate(int nx, int ny, double width = 1.0, double height = 0.3,
                         double radius = 0.1, double tag_radius = 0.28);

} // namespace convfem
