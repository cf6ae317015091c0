#include "convfem/interp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace convfem {

namespace {
constexpr double kParentTol = 1e-10;

long binom(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
} // namespace

void ConvConfig::validate(int dim) const {
    if (s < 1) throw ValidationError("patch size s must be >= 1");
    if (p < 1) throw ValidationError("reproducing order p must be >= 1");
    if (a <= 0.0) throw ValidationError("dilation parameter a must be > 0");
    if (kernel == ConvKernel::lagrange1d && dim != 1)
        throw ValidationError("lagrange1d kernel is one-dimensional");
    if (kernel == ConvKernel::rbf && rbf_exponent <= 0.0)
        throw ValidationError("rbf exponent must be > 0");
}

int ConvConfig::poly_basis_size(int dim) const {
    return static_cast<int>(binom(p + dim, dim));
}

Eigen::VectorXd fe_shape(ElementKind kind, const Eigen::Vector3d& xi) {
    switch (kind) {
    case ElementKind::line2: {
        if (std::abs(xi[0]) > 1.0 + kParentTol)
            throw ValidationError("parent coordinate outside line2 domain");
        Eigen::VectorXd N(2);
        N << 0.5 * (1.0 - xi[0]), 0.5 * (1.0 + xi[0]);
        return N;
    }
    case ElementKind::quad4: {
        if (std::abs(xi[0]) > 1.0 + kParentTol || std::abs(xi[1]) > 1.0 + kParentTol)
            throw ValidationError("parent coordinate outside quad4 domain");
        Eigen::VectorXd N(4);
        for (int a = 0; a < 4; ++a) {
            Eigen::Vector3d c = parent_node_coord(kind, a);
            N[a] = 0.25 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]);
        }
        return N;
    }
    case ElementKind::tet4: {
        const double l0 = 1.0 - xi[0] - xi[1] - xi[2];
        if (xi[0] < -kParentTol || xi[1] < -kParentTol || xi[2] < -kParentTol ||
            l0 < -kParentTol)
            throw ValidationError("parent coordinate outside tet4 domain");
        Eigen::VectorXd N(4);
        N << l0, xi[0], xi[1], xi[2];
        return N;
    }
    }
    throw ValidationError("unknown element kind");
}

Eigen::MatrixXd fe_shape_gradients(ElementKind kind, const Eigen::Vector3d& xi) {
    switch (kind) {
    case ElementKind::line2: {
        Eigen::MatrixXd dN = Eigen::MatrixXd::Zero(3, 2);
        dN(0, 0) = -0.5;
        dN(0, 1) = 0.5;
        return dN;
    }
    case ElementKind::quad4: {
        Eigen::MatrixXd dN = Eigen::MatrixXd::Zero(3, 4);
        for (int a = 0; a < 4; ++a) {
            Eigen::Vector3d c = parent_node_coord(kind, a);
            dN(0, a) = 0.25 * c[0] * (1.0 + c[1] * xi[1]);
            dN(1, a) = 0.25 * c[1] * (1.0 + c[0] * xi[0]);
        }
        return dN;
    }
    case ElementKind::tet4: {
        Eigen::MatrixXd dN = Eigen::MatrixXd::Zero(3, 4);
        dN.col(0) = Eigen::Vector3d(-1, -1, -1);
        dN.col(1) = Eigen::Vector3d(1, 0, 0);
        dN.col(2) = Eigen::Vector3d(0, 1, 0);
        dN.col(3) = Eigen::Vector3d(0, 0, 1);
        return dN;
    }
    }
    throw ValidationError("unknown element kind");
}

void lagrange_conv_patch(const std::vector<double>& xs, double X,
                         Eigen::VectorXd& W, Eigen::VectorXd& dW) {
    const int n = static_cast<int>(xs.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (xs[i] == xs[j])
                throw ValidationError("duplicate node coordinates in Lagrange patch");
    W.resize(n);
    dW.resize(n);
    for (int j = 0; j < n; ++j) {
        double denom = 1.0;
        for (int k = 0; k < n; ++k)
            if (k != j) denom *= xs[j] - xs[k];
        double val = 1.0;
        for (int k = 0; k < n; ++k)
            if (k != j) val *= X - xs[k];
        W[j] = val / denom;
        double der = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l == j) continue;
            double term = 1.0;
            for (int k = 0; k < n; ++k)
                if (k != j && k != l) term *= X - xs[k];
            der += term;
        }
        dW[j] = der / denom;
    }
}

namespace {

// Monomial basis of total degree <= p in `dim` variables, and its gradient.
// Ordering: degree-major, lexicographic within a degree; deterministic.
void poly_basis(int dim, int p, const Eigen::Vector3d& x, Eigen::VectorXd& P,
                Eigen::MatrixXd* dP) {
    std::vector<Eigen::Vector3i> exps;
    for (int d = 0; d <= p; ++d) {
        if (dim == 1) {
            exps.push_back({d, 0, 0});
        } else if (dim == 2) {
            for (int i = d; i >= 0; --i) exps.push_back({i, d - i, 0});
        } else {
            for (int i = d; i >= 0; --i)
                for (int j = d - i; j >= 0; --j) exps.push_back({i, j, d - i - j});
        }
    }
    const int m = static_cast<int>(exps.size());
    P.resize(m);
    if (dP) dP->setZero(3, m);
    auto ipow = [](double v, int e) {
        double r = 1.0;
        for (int k = 0; k < e; ++k) r *= v;
        return r;
    };
    for (int t = 0; t < m; ++t) {
        const Eigen::Vector3i& e = exps[t];
        P[t] = ipow(x[0], e[0]) * ipow(x[1], e[1]) * ipow(x[2], e[2]);
        if (dP) {
            for (int c = 0; c < dim; ++c) {
                if (e[c] == 0) continue;
                double v = e[c];
                for (int cc = 0; cc < 3; ++cc)
                    v *= ipow(x[cc], cc == c ? e[cc] - 1 : e[cc]);
                (*dP)(c, t) = v;
            }
        }
    }
}

// Multiquadric kernel value and gradient in scaled coordinates:
// B(r) = (r^2 + c^2)^q with c = a (the spacing is scaled out).
double mq_value(double r2, double c2, double q) { return std::pow(r2 + c2, q); }

} // namespace

Eigen::VectorXd PatchBasis::moment_matrix_times(const Eigen::VectorXd& v) const {
    return G_cache * v;
}

PatchBasis rbf_assemble_patch(const Mesh& mesh, const NodePatch& patch,
                              const ConvConfig& cfg) {
    cfg.validate(mesh.dimension);
    const int dim = mesh.dimension;
    const int n = static_cast<int>(patch.members.size());
    const int m = cfg.poly_basis_size(dim);
    if (n < m)
        throw ValidationError("patch too small: node " + std::to_string(patch.center) +
                              " has " + std::to_string(n) + " patch nodes, basis needs " +
                              std::to_string(m));

    PatchBasis b;
    b.patch = patch;
    b.cfg = cfg;
    b.dim = dim;
    b.n = n;
    b.m = m;
    b.origin = mesh.nodes[patch.center];
    b.scale = patch.spacing;

    b.coords.resize(n, 3);
    for (int i = 0; i < n; ++i)
        b.coords.row(i) = ((mesh.nodes[patch.members[i]] - b.origin) / b.scale).transpose();

    const double c2 = cfg.a * cfg.a;
    const double q = cfg.rbf_exponent;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double r2 = (b.coords.row(i) - b.coords.row(j)).squaredNorm();
            G(i, j) = G(j, i) = mq_value(r2, c2, q);
        }
    Eigen::VectorXd P;
    for (int i = 0; i < n; ++i) {
        poly_basis(dim, cfg.p, b.coords.row(i).transpose(), P, nullptr);
        G.block(i, n, 1, m) = P.transpose();
        G.block(n, i, m, 1) = P;
    }

    b.G_cache = G;
    b.lu.compute(G);
    // The rcond estimate misses exact zero pivots; check pivots and a probe
    // solve instead.
    const Eigen::VectorXd pivots = b.lu.matrixLU().diagonal().cwiseAbs();
    const double pmax = pivots.maxCoeff();
    bool singular = !(pmax > 0.0) || pivots.minCoeff() < 1e-14 * pmax;
    if (!singular) {
        const Eigen::VectorXd probe = Eigen::VectorXd::Ones(n + m);
        const Eigen::VectorXd x = b.lu.solve(probe);
        singular = !x.allFinite() || (G * x - probe).norm() > 1e-8 * probe.norm();
    }
    if (singular)
        throw NumericalError("singular moment matrix for patch of node " +
                             std::to_string(patch.center) +
                             " (degenerate node geometry)");
    return b;
}

void rbf_conv_patch(const PatchBasis& b, const Eigen::Vector3d& X,
                    Eigen::VectorXd& W, Eigen::MatrixXd& dW) {
    const int dim = b.dim;
    const int n = b.n, m = b.m;
    const double c2 = b.cfg.a * b.cfg.a;
    const double q = b.cfg.rbf_exponent;

    Eigen::Vector3d xs = (X - b.origin) / b.scale;

    // Right-hand sides: the basis row and its spatial gradients.
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + m, 1 + dim);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d diff = Eigen::Vector3d::Zero();
        diff.head(dim) = xs.head(dim) - b.coords.row(i).head(dim).transpose();
        const double r2 = diff.squaredNorm();
        rhs(i, 0) = mq_value(r2, c2, q);
        const double dfac = q * std::pow(r2 + c2, q - 1.0) * 2.0;
        for (int c = 0; c < dim; ++c) rhs(i, 1 + c) = dfac * diff[c];
    }
    Eigen::VectorXd P;
    Eigen::MatrixXd dP;
    poly_basis(dim, b.cfg.p, xs, P, &dP);
    rhs.block(n, 0, m, 1) = P;
    for (int c = 0; c < dim; ++c) rhs.block(n, 1 + c, m, 1) = dP.row(c).transpose();

    // G is symmetric, so solving G y = rhs gives y = G^-1 rhs = (rhs^T G^-1)^T.
    Eigen::MatrixXd sol = b.lu.solve(rhs);
    W = sol.col(0).head(n);
    dW.resize(dim, n);
    for (int c = 0; c < dim; ++c)
        dW.row(c) = sol.col(1 + c).head(n).transpose() / b.scale;
}

BasisTable::BasisTable(const Mesh& mesh, const ConvConfig& cfg) {
    std::vector<int> all(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) all[i] = i;
    *this = BasisTable(mesh, cfg, all);
}

BasisTable::BasisTable(const Mesh& mesh, const ConvConfig& cfg,
                       const std::vector<int>& nodes)
    : cfg_(cfg) {
    cfg.validate(mesh.dimension);
    const int count = static_cast<int>(nodes.size());
    std::vector<std::shared_ptr<const PatchBasis>> built(count);
    std::vector<std::string> errors(count);

#pragma omp parallel for schedule(dynamic, 16)
    for (int k = 0; k < count; ++k) {
        try {
            const int node = nodes[k];
            NodePatch patch = node_patch(mesh, node, cfg.s);
            if (cfg.kernel == ConvKernel::lagrange1d) {
                patch = expand_node_patch(mesh, patch, cfg.p + 1);
                // keep the p+1 nodes nearest the center (ties toward lower id)
                std::vector<int> mem = patch.members;
                const Eigen::Vector3d xc = mesh.nodes[node];
                std::stable_sort(mem.begin(), mem.end(), [&](int i, int j) {
                    return (mesh.nodes[i] - xc).norm() < (mesh.nodes[j] - xc).norm();
                });
                mem.resize(cfg.p + 1);
                std::sort(mem.begin(), mem.end());
                patch.members = mem;
                auto b = std::make_shared<PatchBasis>();
                b->patch = patch;
                b->cfg = cfg;
                b->dim = 1;
                b->n = cfg.p + 1;
                b->m = cfg.p + 1;
                for (int i : patch.members) b->coords1d.push_back(mesh.nodes[i][0]);
                built[k] = b;
            } else {
                const int m = cfg.poly_basis_size(mesh.dimension);
                patch = expand_node_patch(mesh, patch, m);
                for (int attempt = 0;; ++attempt) {
                    try {
                        built[k] = std::make_shared<PatchBasis>(
                            rbf_assemble_patch(mesh, patch, cfg));
                        break;
                    } catch (const NumericalError&) {
                        if (attempt >= 3) throw;
                        const int want = static_cast<int>(patch.members.size()) + 1;
                        NodePatch grown = expand_node_patch(mesh, patch, want);
                        if (grown.members.size() == patch.members.size()) throw;
                        patch = grown;
                    }
                }
            }
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }

    for (int k = 0; k < count; ++k) {
        if (!errors[k].empty()) throw NumericalError(errors[k]);
        bases_[nodes[k]] = built[k];
    }
}

const PatchBasis& BasisTable::at(int node) const {
    auto it = bases_.find(node);
    if (it == bases_.end())
        throw ValidationError("missing patch basis for node " + std::to_string(node));
    return *it->second;
}

namespace {

void kernel_weights(const PatchBasis& b, const Eigen::Vector3d& X,
                    Eigen::VectorXd& W, Eigen::MatrixXd& dW) {
    if (b.cfg.kernel == ConvKernel::lagrange1d) {
        Eigen::VectorXd d;
        lagrange_conv_patch(b.coords1d, X[0], W, d);
        dW.resize(1, W.size());
        dW.row(0) = d.transpose();
    } else {
        rbf_conv_patch(b, X, W, dW);
    }
}

struct ElementGeometry {
    Eigen::VectorXd N;
    Eigen::MatrixXd dNdX; // dim x nen
    Eigen::Vector3d X;
    double detJ;
    Eigen::MatrixXd J; // dim x dim
};

ElementGeometry element_geometry(const Mesh& mesh, const Element& el,
                                 const Eigen::Vector3d& xi) {
    const int dim = mesh.dimension;
    const int nen = element_node_count(el.kind);
    ElementGeometry g;
    g.N = fe_shape(el.kind, xi);
    Eigen::MatrixXd dN = fe_shape_gradients(el.kind, xi); // 3 x nen, parent
    g.X = Eigen::Vector3d::Zero();
    g.J.setZero(dim, dim);
    for (int a = 0; a < nen; ++a) {
        g.X += g.N[a] * mesh.nodes[el.nodes[a]];
        g.J += mesh.nodes[el.nodes[a]].head(dim) * dN.col(a).head(dim).transpose();
    }
    g.detJ = g.J.determinant();
    Eigen::MatrixXd Jinv = g.J.inverse();
    g.dNdX.resize(dim, nen);
    for (int a = 0; a < nen; ++a)
        g.dNdX.col(a) = Jinv.transpose() * dN.col(a).head(dim);
    return g;
}

} // namespace

ShapeSample fe_sample(const Mesh& mesh, int element, const Eigen::Vector3d& xi) {
    const Element& el = mesh.elements[element];
    ElementGeometry g = element_geometry(mesh, el, xi);
    ShapeSample s;
    s.element = element;
    s.xi = xi;
    s.X = g.X;
    s.nodes = el.nodes;
    s.N = g.N;
    s.B0 = g.dNdX;
    s.jacobian_det = g.detJ;
    return s;
}

ShapeSample conv_sample(const Mesh& mesh, int element, const Eigen::Vector3d& xi,
                        const BasisTable& bases) {
    const Element& el = mesh.elements[element];
    const int dim = mesh.dimension;
    const int nen = element_node_count(el.kind);
    ElementGeometry g = element_geometry(mesh, el, xi);

    // Element patch = union of the (possibly expanded) nodal patches in use.
    std::set<int> patch_set;
    for (int a : el.nodes) {
        const PatchBasis& b = bases.at(a);
        patch_set.insert(b.patch.members.begin(), b.patch.members.end());
    }
    ShapeSample s;
    s.element = element;
    s.xi = xi;
    s.X = g.X;
    s.nodes.assign(patch_set.begin(), patch_set.end());
    const int n = static_cast<int>(s.nodes.size());
    s.N = Eigen::VectorXd::Zero(n);
    s.B0 = Eigen::MatrixXd::Zero(dim, n);
    s.jacobian_det = g.detJ;

    std::map<int, int> slot;
    for (int i = 0; i < n; ++i) slot[s.nodes[i]] = i;

    Eigen::VectorXd W;
    Eigen::MatrixXd dW;
    for (int a = 0; a < nen; ++a) {
        const PatchBasis& b = bases.at(el.nodes[a]);
        kernel_weights(b, g.X, W, dW);
        for (int j = 0; j < b.n; ++j) {
            const int k = slot.at(b.patch.members[j]);
            s.N[k] += g.N[a] * W[j];
            s.B0.col(k) += g.dNdX.col(a) * W[j] + g.N[a] * dW.col(j);
        }
    }
    return s;
}

Eigen::Vector3d inverse_map(const Mesh& mesh, int element, const Eigen::Vector3d& X) {
    const Element& el = mesh.elements[element];
    const int dim = mesh.dimension;
    Eigen::Vector3d xi = Eigen::Vector3d::Zero();
    if (el.kind == ElementKind::tet4) xi = {0.25, 0.25, 0.25};
    for (int it = 0; it < 50; ++it) {
        const int nen = element_node_count(el.kind);
        Eigen::VectorXd N(nen);
        // evaluate without the domain guard: Newton may step slightly outside
        switch (el.kind) {
        case ElementKind::line2:
            N.resize(2);
            N << 0.5 * (1 - xi[0]), 0.5 * (1 + xi[0]);
            break;
        case ElementKind::quad4:
            N.resize(4);
            for (int a = 0; a < 4; ++a) {
                Eigen::Vector3d c = parent_node_coord(el.kind, a);
                N[a] = 0.25 * (1 + c[0] * xi[0]) * (1 + c[1] * xi[1]);
            }
            break;
        case ElementKind::tet4:
            N.resize(4);
            N << 1 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2];
            break;
        }
        Eigen::MatrixXd dN = fe_shape_gradients(el.kind, xi);
        Eigen::Vector3d Xc = Eigen::Vector3d::Zero();
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
        for (int a = 0; a < nen; ++a) {
            Xc += N[a] * mesh.nodes[el.nodes[a]];
            J += mesh.nodes[el.nodes[a]].head(dim) * dN.col(a).head(dim).transpose();
        }
        Eigen::VectorXd res = (X - Xc).head(dim);
        if (res.norm() < 1e-14 * (1.0 + X.norm())) break;
        Eigen::VectorXd dxi = J.partialPivLu().solve(res);
        xi.head(dim) += dxi;
    }
    return xi;
}

} // namespace convfem
