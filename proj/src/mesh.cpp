#include "convfem/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "convfem/interp.hpp"

namespace convfem {

int element_dim(ElementKind kind) {
    switch (kind) {
    case ElementKind::line2: return 1;
    case ElementKind::quad4: return 2;
    case ElementKind::tet4: return 3;
    }
    return 0;
}

int element_node_count(ElementKind kind) {
    switch (kind) {
    case ElementKind::line2: return 2;
    case ElementKind::quad4: return 4;
    case ElementKind::tet4: return 4;
    }
    return 0;
}

int element_face_count(ElementKind kind) {
    switch (kind) {
    case ElementKind::line2: return 2;
    case ElementKind::quad4: return 4;
    case ElementKind::tet4: return 4;
    }
    return 0;
}

std::vector<int> face_local_nodes(ElementKind kind, int face) {
    switch (kind) {
    case ElementKind::line2: {
        static const std::array<std::vector<int>, 2> faces = {{{0}, {1}}};
        if (face < 0 || face >= 2) throw ValidationError("line2 face index out of range");
        return faces[face];
    }
    case ElementKind::quad4: {
        static const std::array<std::vector<int>, 4> faces = {
            {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
        if (face < 0 || face >= 4) throw ValidationError("quad4 face index out of range");
        return faces[face];
    }
    case ElementKind::tet4: {
        // face f is opposite local node f
        static const std::array<std::vector<int>, 4> faces = {
            {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
        if (face < 0 || face >= 4) throw ValidationError("tet4 face index out of range");
        return faces[face];
    }
    }
    throw ValidationError("unknown element kind");
}

const char* element_kind_name(ElementKind kind) {
    switch (kind) {
    case ElementKind::line2: return "line2";
    case ElementKind::quad4: return "quad4";
    case ElementKind::tet4: return "tet4";
    }
    return "?";
}

ElementKind element_kind_from_name(const std::string& name) {
    if (name == "line2") return ElementKind::line2;
    if (name == "quad4") return ElementKind::quad4;
    if (name == "tet4") return ElementKind::tet4;
    throw ValidationError("unknown element kind '" + name + "'");
}

Eigen::Vector3d parent_node_coord(ElementKind kind, int a) {
    switch (kind) {
    case ElementKind::line2: {
        static const double xi[2] = {-1.0, 1.0};
        return {xi[a], 0.0, 0.0};
    }
    case ElementKind::quad4: {
        static const double xi[4] = {-1.0, 1.0, 1.0, -1.0};
        static const double eta[4] = {-1.0, -1.0, 1.0, 1.0};
        return {xi[a], eta[a], 0.0};
    }
    case ElementKind::tet4: {
        static const double c[4][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        return {c[a][0], c[a][1], c[a][2]};
    }
    }
    return Eigen::Vector3d::Zero();
}

namespace {

// Jacobian determinant of the isoparametric map at a parent point.
double jacobian_det_at(const Mesh& mesh, const Element& el, const Eigen::Vector3d& xi) {
    const int dim = mesh.dimension;
    const int nen = element_node_count(el.kind);
    Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
    Eigen::MatrixXd dN = fe_shape_gradients(el.kind, xi);
    J.topLeftCorner(dim, dim).setZero();
    for (int a = 0; a < nen; ++a)
        J.topLeftCorner(dim, dim) +=
            mesh.nodes[el.nodes[a]].head(dim) * dN.col(a).head(dim).transpose();
    return J.topLeftCorner(dim, dim).determinant();
}

} // namespace

void Mesh::finalize() {
    const int nn = node_count();
    if (dimension < 1 || dimension > 3)
        throw ValidationError("mesh dimension must be 1, 2 or 3");

    node_elements.assign(nn, {});
    std::vector<std::set<int>> nbr(nn);

    for (int e = 0; e < element_count(); ++e) {
        const Element& el = elements[e];
        if (element_dim(el.kind) != dimension)
            throw ValidationError("element " + std::to_string(e) +
                                  " kind does not match mesh dimension");
        const int nen = element_node_count(el.kind);
        if (static_cast<int>(el.nodes.size()) != nen)
            throw ValidationError("element " + std::to_string(e) + " has wrong node count");
        std::set<int> seen;
        for (int a : el.nodes) {
            if (a < 0 || a >= nn)
                throw ValidationError("dangling node reference " + std::to_string(a) +
                                      " in element " + std::to_string(e));
            if (!seen.insert(a).second)
                throw ValidationError("duplicate node id in element " + std::to_string(e));
            node_elements[a].push_back(e);
        }
        // edge connectivity
        switch (el.kind) {
        case ElementKind::line2:
            nbr[el.nodes[0]].insert(el.nodes[1]);
            nbr[el.nodes[1]].insert(el.nodes[0]);
            break;
        case ElementKind::quad4:
            for (int k = 0; k < 4; ++k) {
                int a = el.nodes[k], b = el.nodes[(k + 1) % 4];
                nbr[a].insert(b);
                nbr[b].insert(a);
            }
            break;
        case ElementKind::tet4:
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    nbr[el.nodes[i]].insert(el.nodes[j]);
                    nbr[el.nodes[j]].insert(el.nodes[i]);
                }
            break;
        }
    }

    node_neighbors.assign(nn, {});
    for (int i = 0; i < nn; ++i)
        node_neighbors[i].assign(nbr[i].begin(), nbr[i].end());

    // Jacobian positivity. For line2/tet4 det J is constant; for quad4 it is
    // linear in each parent coordinate, so corner checks bound the element.
    for (int e = 0; e < element_count(); ++e) {
        const Element& el = elements[e];
        Eigen::Vector3d center = Eigen::Vector3d::Zero();
        const int nen = element_node_count(el.kind);
        for (int a = 0; a < nen; ++a) center += parent_node_coord(el.kind, a);
        center /= nen;
        if (jacobian_det_at(*this, el, center) <= 0.0)
            throw ValidationError("inverted element " + std::to_string(e) +
                                  " (non-positive Jacobian)");
        if (el.kind == ElementKind::quad4) {
            for (int a = 0; a < 4; ++a)
                if (jacobian_det_at(*this, el, parent_node_coord(el.kind, a)) <= 0.0)
                    throw ValidationError("inverted element " + std::to_string(e) +
                                          " (non-positive Jacobian at corner)");
        }
    }

    for (size_t f = 0; f < facets.size(); ++f) {
        Facet& fa = facets[f];
        if (fa.element < 0 || fa.element >= element_count())
            throw ValidationError("facet " + std::to_string(f) +
                                  " references missing element");
        const Element& el = elements[fa.element];
        if (fa.face < 0 || fa.face >= element_face_count(el.kind))
            throw ValidationError("facet " + std::to_string(f) + " face index out of range");
        fa.nodes.clear();
        for (int a : face_local_nodes(el.kind, fa.face)) fa.nodes.push_back(el.nodes[a]);
    }

    for (const auto& [name, ids] : nodesets)
        for (int a : ids)
            if (a < 0 || a >= nn)
                throw ValidationError("nodeset '" + name + "' references missing node " +
                                      std::to_string(a));
    for (const auto& [name, ids] : facetsets)
        for (int a : ids)
            if (a < 0 || a >= static_cast<int>(facets.size()))
                throw ValidationError("facetset '" + name + "' references missing facet " +
                                      std::to_string(a));
    for (const auto& [e, tag] : region_tags)
        if (e < 0 || e >= element_count())
            throw ValidationError("region tag '" + tag + "' on missing element " +
                                  std::to_string(e));
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#') break;
        out.push_back(tok);
    }
    return out;
}

int to_int(const std::string& s, const char* what, int lineno) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("mesh line " + std::to_string(lineno) + ": bad " + what +
                              " '" + s + "'");
    }
}

double to_real(const std::string& s, const char* what, int lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("mesh line " + std::to_string(lineno) + ": bad " + what +
                              " '" + s + "'");
    }
}

} // namespace

Mesh parse_mesh(const std::string& text) {
    Mesh mesh;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    bool have_dim = false;

    auto next_tokens = [&](std::vector<std::string>& toks) -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            toks = tokenize(line);
            if (!toks.empty()) return true;
        }
        return false;
    };

    std::vector<std::string> toks;
    while (next_tokens(toks)) {
        const std::string& key = toks[0];
        if (key == "dimension") {
            if (toks.size() != 2) throw ValidationError("mesh line " + std::to_string(lineno) + ": expected 'dimension <d>'");
            mesh.dimension = to_int(toks[1], "dimension", lineno);
            have_dim = true;
        } else if (key == "nodes") {
            if (!have_dim) throw ValidationError("mesh: 'dimension' must precede 'nodes'");
            const int n = to_int(toks.at(1), "node count", lineno);
            mesh.nodes.reserve(n);
            for (int i = 0; i < n; ++i) {
                if (!next_tokens(toks))
                    throw ValidationError("mesh: unexpected end of file in nodes block");
                if (static_cast<int>(toks.size()) != 1 + mesh.dimension)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": expected 'id " +
                                          (mesh.dimension == 1 ? "x" : mesh.dimension == 2 ? "x y" : "x y z") + "'");
                if (to_int(toks[0], "node id", lineno) != i)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": node ids must be consecutive from 0");
                Eigen::Vector3d x = Eigen::Vector3d::Zero();
                for (int c = 0; c < mesh.dimension; ++c)
                    x[c] = to_real(toks[1 + c], "coordinate", lineno);
                mesh.nodes.push_back(x);
            }
        } else if (key == "elements") {
            const int n = to_int(toks.at(1), "element count", lineno);
            mesh.elements.reserve(n);
            for (int i = 0; i < n; ++i) {
                if (!next_tokens(toks))
                    throw ValidationError("mesh: unexpected end of file in elements block");
                if (toks.size() < 3)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": expected 'id kind n0 ... [tag]'");
                if (to_int(toks[0], "element id", lineno) != i)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": element ids must be consecutive from 0");
                Element el;
                el.kind = element_kind_from_name(toks[1]);
                const int nen = element_node_count(el.kind);
                if (static_cast<int>(toks.size()) < 2 + nen)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": too few node ids for " + toks[1]);
                for (int a = 0; a < nen; ++a)
                    el.nodes.push_back(to_int(toks[2 + a], "node id", lineno));
                if (static_cast<int>(toks.size()) == 2 + nen + 1)
                    mesh.region_tags[i] = toks[2 + nen];
                else if (static_cast<int>(toks.size()) > 2 + nen + 1)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": trailing tokens after element definition");
                mesh.elements.push_back(std::move(el));
            }
        } else if (key == "facets") {
            const int n = to_int(toks.at(1), "facet count", lineno);
            for (int i = 0; i < n; ++i) {
                if (!next_tokens(toks))
                    throw ValidationError("mesh: unexpected end of file in facets block");
                if (toks.size() != 2)
                    throw ValidationError("mesh line " + std::to_string(lineno) +
                                          ": expected '<element> <face>'");
                Facet f;
                f.element = to_int(toks[0], "element id", lineno);
                f.face = to_int(toks[1], "face index", lineno);
                mesh.facets.push_back(f);
            }
        } else if (key == "nodeset" || key == "facetset") {
            if (toks.size() < 2)
                throw ValidationError("mesh line " + std::to_string(lineno) +
                                      ": expected '" + key + " <name> <ids...>'");
            std::vector<int>& ids = (key == "nodeset") ? mesh.nodesets[toks[1]]
                                                       : mesh.facetsets[toks[1]];
            for (size_t k = 2; k < toks.size(); ++k)
                ids.push_back(to_int(toks[k], "id", lineno));
        } else {
            throw ValidationError("mesh line " + std::to_string(lineno) +
                                  ": unknown keyword '" + key + "'");
        }
    }

    if (!have_dim) throw ValidationError("mesh: missing 'dimension'");
    mesh.finalize();
    return mesh;
}

std::string serialize_mesh(const Mesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << "dimension " << mesh.dimension << "\n";
    os << "nodes " << mesh.node_count() << "\n";
    for (int i = 0; i < mesh.node_count(); ++i) {
        os << i;
        for (int c = 0; c < mesh.dimension; ++c) os << " " << mesh.nodes[i][c];
        os << "\n";
    }
    os << "elements " << mesh.element_count() << "\n";
    for (int e = 0; e < mesh.element_count(); ++e) {
        const Element& el = mesh.elements[e];
        os << e << " " << element_kind_name(el.kind);
        for (int a : el.nodes) os << " " << a;
        auto it = mesh.region_tags.find(e);
        if (it != mesh.region_tags.end()) os << " " << it->second;
        os << "\n";
    }
    os << "facets " << mesh.facets.size() << "\n";
    for (const Facet& f : mesh.facets) os << f.element << " " << f.face << "\n";
    for (const auto& [name, ids] : mesh.nodesets) {
        os << "nodeset " << name;
        for (int a : ids) os << " " << a;
        os << "\n";
    }
    for (const auto& [name, ids] : mesh.facetsets) {
        os << "facetset " << name;
        for (int a : ids) os << " " << a;
        os << "\n";
    }
    return os.str();
}

double characteristic_spacing(const Mesh& mesh, int node) {
    if (node < 0 || node >= mesh.node_count())
        throw ValidationError("characteristic_spacing: node id out of range");
    const auto& nbrs = mesh.node_neighbors[node];
    if (nbrs.empty())
        throw ValidationError("characteristic_spacing: isolated node " + std::to_string(node));
    double sum = 0.0;
    for (int j : nbrs) sum += (mesh.nodes[j] - mesh.nodes[node]).norm();
    return sum / static_cast<double>(nbrs.size());
}

namespace {

std::vector<int> ring_members(const Mesh& mesh, int node, int s) {
    std::set<int> current{node};
    for (int layer = 0; layer < s; ++layer) {
        std::set<int> grown = current;
        for (int i : current)
            for (int e : mesh.node_elements[i])
                for (int a : mesh.elements[e].nodes) grown.insert(a);
        if (grown.size() == current.size()) break; // saturated
        current.swap(grown);
    }
    return {current.begin(), current.end()};
}

std::vector<int> metric_members(const Mesh& mesh, int node, int s, double delta) {
    std::vector<int> out;
    const double bound = s * delta * (1.0 + 1e-9);
    const Eigen::Vector3d& xc = mesh.nodes[node];
    for (int j = 0; j < mesh.node_count(); ++j) {
        bool inside = true;
        for (int c = 0; c < mesh.dimension; ++c)
            if (std::abs(mesh.nodes[j][c] - xc[c]) > bound) inside = false;
        if (inside) out.push_back(j);
    }
    return out;
}

} // namespace

NodePatch node_patch(const Mesh& mesh, int node, int s, PatchRule rule) {
    if (node < 0 || node >= mesh.node_count())
        throw ValidationError("node_patch: node id out of range");
    if (s < 1) throw ValidationError("node_patch: patch size must be >= 1");
    NodePatch p;
    p.center = node;
    p.spacing = characteristic_spacing(mesh, node);
    p.members = (rule == PatchRule::rings) ? ring_members(mesh, node, s)
                                           : metric_members(mesh, node, s, p.spacing);
    return p;
}

std::vector<int> element_patch(const Mesh& mesh, int element, int s, PatchRule rule) {
    if (element < 0 || element >= mesh.element_count())
        throw ValidationError("element_patch: element id out of range");
    std::set<int> members;
    for (int a : mesh.elements[element].nodes) {
        NodePatch p = node_patch(mesh, a, s, rule);
        members.insert(p.members.begin(), p.members.end());
    }
    return {members.begin(), members.end()};
}

NodePatch expand_node_patch(const Mesh& mesh, const NodePatch& patch, int min_nodes) {
    NodePatch p = patch;
    int extra = 0;
    while (static_cast<int>(p.members.size()) < min_nodes) {
        std::set<int> grown(p.members.begin(), p.members.end());
        for (int i : p.members)
            for (int e : mesh.node_elements[i])
                for (int a : mesh.elements[e].nodes) grown.insert(a);
        if (grown.size() == p.members.size())
            throw ValidationError("patch of node " + std::to_string(patch.center) +
                                  " cannot reach " + std::to_string(min_nodes) +
                                  " nodes (mesh too small)");
        p.members.assign(grown.begin(), grown.end());
        if (++extra > 8)
            throw ValidationError("patch expansion for node " +
                                  std::to_string(patch.center) + " did not terminate");
    }
    return p;
}

} // namespace convfem
