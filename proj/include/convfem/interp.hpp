#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "convfem/mesh.hpp"

namespace convfem {

enum class ConvKernel { lagrange1d, rbf };

// Parameters of the convolution patch functions: patch size s, dilation a,
// reproducing order p, and the multiquadric exponent q for the RBF kernel.
struct ConvConfig {
    int s = 1;
    double a = 1.0;
    int p = 1;
    ConvKernel kernel = ConvKernel::rbf;
    double rbf_exponent = 1.03;

    void validate(int dim) const;
    // Polynomial basis size m = binom(p + dim, dim).
    int poly_basis_size(int dim) const;
};

// Standard FE shape functions on the parent domain. Throws if xi is outside.
Eigen::VectorXd fe_shape(ElementKind kind, const Eigen::Vector3d& xi);
// Parent derivatives dN/dxi, one column per node (dim x nen accessed as 3 x nen).
Eigen::MatrixXd fe_shape_gradients(ElementKind kind, const Eigen::Vector3d& xi);

// 1D Lagrange interpolation weights over the given node coordinates,
// evaluated at X, with exact analytic derivatives dW/dX.
void lagrange_conv_patch(const std::vector<double>& node_coords, double X,
                         Eigen::VectorXd& W, Eigen::VectorXd& dW);

// Precomputed interpolation backbone of one nodal patch: the factorized
// moment matrix of the radial point interpolation over the patch nodes,
// assembled once in (shifted, spacing-scaled) material coordinates.
struct PatchBasis {
    NodePatch patch;
    ConvConfig cfg;
    int dim = 0;
    int n = 0; // patch node count
    int m = 0; // polynomial term count (p+1 for the 1D Lagrange kernel)
    Eigen::Vector3d origin = Eigen::Vector3d::Zero(); // scaling center
    double scale = 1.0;                               // = patch spacing
    Eigen::MatrixXd coords;                           // n x dim, scaled
    Eigen::MatrixXd G_cache;                          // assembled moment matrix
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;          // factorization of G
    std::vector<double> coords1d; // raw coordinates, Lagrange kernel only

    // Multiplies the assembled moment matrix by a vector (testing hook for
    // the factorization-consistency invariant).
    Eigen::VectorXd moment_matrix_times(const Eigen::VectorXd& v) const;
};

// Assembles and factorizes the RBF moment matrix for a patch.
// Throws ValidationError("patch too small ...") when n < m and
// NumericalError("singular moment matrix ...") when factorization fails.
PatchBasis rbf_assemble_patch(const Mesh& mesh, const NodePatch& patch,
                              const ConvConfig& cfg);

// Evaluates the patch functions W and their spatial derivatives dW (dim x n)
// at material point X.
void rbf_conv_patch(const PatchBasis& basis, const Eigen::Vector3d& X,
                    Eigen::VectorXd& W, Eigen::MatrixXd& dW);

// Per-node table of patch bases. Construction expands boundary patches by
// element rings until the moment problem is solvable.
class BasisTable {
public:
    BasisTable() = default;
    BasisTable(const Mesh& mesh, const ConvConfig& cfg);
    // Builds bases only for the listed nodes (hybrid discretizations).
    BasisTable(const Mesh& mesh, const ConvConfig& cfg, const std::vector<int>& nodes);

    const PatchBasis& at(int node) const;
    bool has(int node) const { return bases_.count(node) != 0; }
    const ConvConfig& config() const { return cfg_; }

private:
    ConvConfig cfg_;
    std::map<int, std::shared_ptr<const PatchBasis>> bases_;
};

// Convolution shape values and material derivatives over an element patch at
// one parent point.
struct ShapeSample {
    int element = -1;
    Eigen::Vector3d xi = Eigen::Vector3d::Zero();
    Eigen::Vector3d X = Eigen::Vector3d::Zero(); // material image of xi
    std::vector<int> nodes;                      // patch node ids, ascending
    Eigen::VectorXd N;                           // values per patch node
    Eigen::MatrixXd B0;                          // dim x n material derivatives
    double jacobian_det = 0.0;                   // parent -> material volume scale
};

// Standard FE sample: patch = the element's own nodes.
ShapeSample fe_sample(const Mesh& mesh, int element, const Eigen::Vector3d& xi);

// Convolution-enriched sample over the element patch, Eqs.-free summary:
// N_K = sum_I N_I(xi) W_K^I(X(xi)) and B0 by the product rule, with dN_I/dX
// through the element's isoparametric Jacobian.
ShapeSample conv_sample(const Mesh& mesh, int element, const Eigen::Vector3d& xi,
                        const BasisTable& bases);

// Inverse isoparametric map: parent coordinates of material point X inside
// `element` (Newton iteration; X must be near the element).
Eigen::Vector3d inverse_map(const Mesh& mesh, int element, const Eigen::Vector3d& X);

} // namespace convfem
