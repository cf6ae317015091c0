#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "convfem/errors.hpp"

namespace convfem {

enum class ElementKind { line2, quad4, tet4 };

int element_dim(ElementKind kind);
int element_node_count(ElementKind kind);
int element_face_count(ElementKind kind);
// Local node indices of a face (point for line2, edge for quad4, triangle for tet4).
std::vector<int> face_local_nodes(ElementKind kind, int face);
const char* element_kind_name(ElementKind kind);
ElementKind element_kind_from_name(const std::string& name);
// Parent coordinates of the element's own nodes.
Eigen::Vector3d parent_node_coord(ElementKind kind, int local_node);

struct Element {
    ElementKind kind;
    std::vector<int> nodes;
};

struct Facet {
    int element = -1;
    int face = -1;
    std::vector<int> nodes; // derived from (element, face)
};

// The Lagrangian discretization: material coordinates, connectivity, boundary
// facets and region tags. Immutable after construction.
struct Mesh {
    int dimension = 0;
    std::vector<Eigen::Vector3d> nodes; // unused components are zero
    std::vector<Element> elements;
    std::vector<Facet> facets;
    std::map<int, std::string> region_tags;           // element id -> tag
    std::map<std::string, std::vector<int>> nodesets;  // name -> node ids
    std::map<std::string, std::vector<int>> facetsets; // name -> facet indices

    // Derived adjacency, filled by finalize().
    std::vector<std::vector<int>> node_elements;  // node -> incident elements
    std::vector<std::vector<int>> node_neighbors; // node -> edge-connected nodes

    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }

    // Builds adjacency and checks all invariants (bounds, duplicates,
    // positive Jacobians, facet consistency). Throws ValidationError.
    void finalize();
};

// Parses the structured text mesh schema (see README for the grammar) and
// returns a validated mesh.
Mesh parse_mesh(const std::string& text);

std::string serialize_mesh(const Mesh& mesh);

enum class PatchRule {
    rings,  // s layers of elements around the node (default, distortion robust)
    metric, // per-component |X_J - X_i| <= s * spacing; uniform grids only
};

struct NodePatch {
    int center = -1;
    std::vector<int> members; // unique, ascending node ids; contains center
    double spacing = 0.0;     // characteristic nodal distance of the center
};

// Average distance from a node to its edge-connected neighbors.
double characteristic_spacing(const Mesh& mesh, int node);

NodePatch node_patch(const Mesh& mesh, int node, int s,
                     PatchRule rule = PatchRule::rings);

// Union of the nodal patches of the element's own nodes, ascending ids.
std::vector<int> element_patch(const Mesh& mesh, int element, int s,
                               PatchRule rule = PatchRule::rings);

// Grows a nodal patch by whole element rings until it has at least
// min_nodes members. Used to keep boundary patches solvable.
NodePatch expand_node_patch(const Mesh& mesh, const NodePatch& patch,
                            int min_nodes);

} // namespace convfem
