#include <doctest.h>

#include <cmath>
#include <random>

#include "convfem/interp.hpp"
#include "convfem/meshbuild.hpp"

using namespace convfem;

TEST_CASE("FE shapes: Kronecker delta and centroid values") {
    Eigen::VectorXd N = fe_shape(ElementKind::line2, {-1.0, 0, 0});
    CHECK(N[0] == doctest::Approx(1.0));
    CHECK(N[1] == doctest::Approx(0.0));

    N = fe_shape(ElementKind::quad4, {0.0, 0.0, 0});
    for (int a = 0; a < 4; ++a) CHECK(N[a] == doctest::Approx(0.25));

    N = fe_shape(ElementKind::tet4, {0.0, 1.0, 0.0}); // vertex 2
    CHECK(N[0] == doctest::Approx(0.0));
    CHECK(N[2] == doctest::Approx(1.0));

    CHECK_THROWS_AS(fe_shape(ElementKind::line2, {1.5, 0, 0}), ValidationError);
    CHECK_THROWS_AS(fe_shape(ElementKind::tet4, {0.6, 0.6, 0.0}), ValidationError);
}

TEST_CASE("FE shapes: partition of unity and gradient sum") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        Eigen::Vector3d xi{u(rng), u(rng), 0.0};
        Eigen::VectorXd N = fe_shape(ElementKind::quad4, xi);
        CHECK(N.sum() == doctest::Approx(1.0).epsilon(1e-14));
        Eigen::MatrixXd dN = fe_shape_gradients(ElementKind::quad4, xi);
        CHECK(dN.rowwise().sum().norm() == doctest::Approx(0.0).epsilon(1e-14));
    }
}

namespace {
// Independent oracle: cardinal interpolation weights from a Vandermonde solve.
Eigen::VectorXd vandermonde_weights(const std::vector<double>& xs, double X) {
    const int n = static_cast<int>(xs.size());
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) V(i, j) = std::pow(xs[i], j);
    Eigen::VectorXd W(n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[k] = 1.0;
        Eigen::VectorXd coef = V.fullPivLu().solve(e);
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += coef[j] * std::pow(X, j);
        W[k] = v;
    }
    return W;
}
} // namespace

TEST_CASE("1D Lagrange convolution weights") {
    std::vector<double> xs = {0.0, 1.0, 2.0};
    Eigen::VectorXd W, dW;

    lagrange_conv_patch(xs, 1.0, W, dW);
    CHECK(W[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(W[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(W[2] == doctest::Approx(0.0).epsilon(1e-14));

    lagrange_conv_patch(xs, 0.5, W, dW);
    CHECK(W[0] == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(W[1] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(W[2] == doctest::Approx(-0.125).epsilon(1e-14));

    // cross-check against the polynomial-fit oracle at random points
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.5, 2.5);
    for (int k = 0; k < 20; ++k) {
        const double X = u(rng);
        lagrange_conv_patch(xs, X, W, dW);
        Eigen::VectorXd Wo = vandermonde_weights(xs, X);
        CHECK((W - Wo).norm() == doctest::Approx(0.0).epsilon(1e-11));
        // derivative against central differences
        Eigen::VectorXd Wp, Wm, tmp;
        lagrange_conv_patch(xs, X + 1e-7, Wp, tmp);
        lagrange_conv_patch(xs, X - 1e-7, Wm, tmp);
        CHECK((dW - (Wp - Wm) / 2e-7).norm() < 1e-6);
    }

    CHECK_THROWS_AS(lagrange_conv_patch({0.0, 0.0, 1.0}, 0.5, W, dW), ValidationError);
}

// The assembled 1D shapes over the second element of a unit-spaced bar have
// closed polynomial forms; 50-point sweep against them.
TEST_CASE("1D assembled convolution shapes match the closed forms") {
    Mesh mesh = build_bar(3, 3.0); // nodes at 0,1,2,3
    ConvConfig cfg{1, 1.0, 2, ConvKernel::lagrange1d, 1.03};
    BasisTable bases(mesh, cfg);

    auto closed = [](double x, int k) {
        switch (k) {
        case 0: return -0.5 * (x - 1) * (x - 2) * (x - 2);
        case 1: return x * (x - 2) * (x - 2) + 0.5 * (x - 1) * (x - 2) * (x - 3);
        case 2: return -(x - 1) * (x - 1) * (x - 3) - 0.5 * x * (x - 1) * (x - 2);
        case 3: return 0.5 * (x - 1) * (x - 1) * (x - 2);
        }
        return 0.0;
    };

    for (int i = 0; i < 50; ++i) {
        const double xi = -1.0 + 2.0 * i / 49.0; // parent coordinate
        ShapeSample s = conv_sample(mesh, 1, {xi, 0, 0}, bases);
        REQUIRE(s.nodes == std::vector<int>{0, 1, 2, 3});
        const double X = 1.5 + 0.5 * xi;
        for (int k = 0; k < 4; ++k)
            CHECK(s.N[k] == doctest::Approx(closed(X, k)).epsilon(1e-13));
    }

    // spot value from the mid-edge evaluation
    ShapeSample s = conv_sample(mesh, 1, {0.0, 0, 0}, bases); // X = 1.5
    CHECK(s.N[0] == doctest::Approx(-0.0625));
    CHECK(s.N[1] == doctest::Approx(0.5625));
    CHECK(s.N[2] == doctest::Approx(0.5625));
    CHECK(s.N[3] == doctest::Approx(-0.0625));

    // Kronecker delta at the element nodes, zero at exterior patch nodes
    ShapeSample left = conv_sample(mesh, 1, {-1.0, 0, 0}, bases); // X = 1
    CHECK(left.N[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(left.N[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(left.N[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(left.N[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("RBF moment matrix: structure, probes, failure modes") {
    Mesh grid = build_quad_grid(4, 4, 4.0, 4.0); // unit spacing
    ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};

    const int center = 2 * 5 + 2;
    NodePatch patch = node_patch(grid, center, 1);
    REQUIRE(patch.members.size() == 9);
    PatchBasis basis = rbf_assemble_patch(grid, patch, cfg);
    CHECK(basis.n == 9);
    CHECK(basis.m == 3);
    CHECK(basis.G_cache.rows() == 12);
    CHECK((basis.G_cache - basis.G_cache.transpose()).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(basis.G_cache.bottomRightCorner(3, 3).norm() == 0.0);

    // stored factorization reproduces G^-1 G = I on probes
    std::mt19937 rng(29);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXd v(12);
        for (int i = 0; i < 12; ++i) v[i] = gauss(rng);
        Eigen::VectorXd back = basis.moment_matrix_times(basis.lu.solve(v));
        CHECK((back - v).norm() < 1e-10 * v.norm());
    }

    // too few nodes for the basis
    NodePatch small;
    small.center = 0;
    small.members = {0, 1};
    small.spacing = 1.0;
    CHECK_THROWS_WITH_AS(rbf_assemble_patch(grid, small, cfg),
                         doctest::Contains("patch too small"), ValidationError);

    // collinear nodes with a linear basis
    NodePatch collinear;
    collinear.center = 1;
    collinear.members = {0, 1, 2, 3, 4}; // bottom row of the grid
    collinear.spacing = 1.0;
    CHECK_THROWS_WITH_AS(rbf_assemble_patch(grid, collinear, cfg),
                         doctest::Contains("singular moment matrix"), NumericalError);
}

TEST_CASE("RBF patch functions: interpolation, unity, linear reproduction") {
    Mesh grid = build_quad_grid(5, 4, 1.0, 0.8);
    ConvConfig cfg{1, 1.2, 1, ConvKernel::rbf, 1.03};
    const int center = 2 * 6 + 2;
    PatchBasis basis = rbf_assemble_patch(grid, node_patch(grid, center, 1), cfg);

    Eigen::VectorXd W;
    Eigen::MatrixXd dW;
    for (int j = 0; j < basis.n; ++j) {
        rbf_conv_patch(basis, grid.nodes[basis.patch.members[j]], W, dW);
        for (int k = 0; k < basis.n; ++k)
            CHECK(W[k] == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
    }

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int k = 0; k < 20; ++k) {
        Eigen::Vector3d X = grid.nodes[center] + Eigen::Vector3d{u(rng), u(rng), 0.0};
        rbf_conv_patch(basis, X, W, dW);
        CHECK(W.sum() == doctest::Approx(1.0).epsilon(1e-11));
        Eigen::Vector3d lin = Eigen::Vector3d::Zero();
        for (int j = 0; j < basis.n; ++j) lin += W[j] * grid.nodes[basis.patch.members[j]];
        CHECK((lin - X).norm() < 1e-10);
        // derivative reproduction: sum_J dW_J x_J = e_c
        for (int c = 0; c < 2; ++c) {
            double unity = 0.0;
            Eigen::Vector3d dx = Eigen::Vector3d::Zero();
            for (int j = 0; j < basis.n; ++j) {
                unity += dW(c, j);
                dx += dW(c, j) * grid.nodes[basis.patch.members[j]];
            }
            CHECK(unity == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(dx[c] == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

namespace {
// Dense oracle: assemble G in raw coordinates, invert fully, take the first
// n components of [R^T(X) P^T(X)] G^-1.
Eigen::VectorXd rpim_dense_oracle(const Mesh& mesh, const std::vector<int>& nodes,
                                  double c, double q, const Eigen::Vector3d& X) {
    const int n = static_cast<int>(nodes.size());
    const int m = 3; // 1, x, y
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double r2 = (mesh.nodes[nodes[i]] - mesh.nodes[nodes[j]]).squaredNorm();
            G(i, j) = std::pow(r2 + c * c, q);
        }
        G(i, n) = G(n, i) = 1.0;
        G(i, n + 1) = G(n + 1, i) = mesh.nodes[nodes[i]][0];
        G(i, n + 2) = G(n + 2, i) = mesh.nodes[nodes[i]][1];
    }
    Eigen::MatrixXd Ginv = G.fullPivLu().inverse();
    Eigen::RowVectorXd row(n + m);
    for (int i = 0; i < n; ++i)
        row[i] = std::pow((X - mesh.nodes[nodes[i]]).squaredNorm() + c * c, q);
    row[n] = 1.0;
    row[n + 1] = X[0];
    row[n + 2] = X[1];
    return (row * Ginv).head(n).transpose();
}
} // namespace

TEST_CASE("RBF patch functions agree with the dense unscaled oracle") {
    Mesh grid = build_quad_grid(4, 4, 1.0, 1.0);
    ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};
    const int center = 2 * 5 + 2;
    NodePatch patch = node_patch(grid, center, 1);
    PatchBasis basis = rbf_assemble_patch(grid, patch, cfg);

    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int k = 0; k < 10; ++k) {
        Eigen::Vector3d X = grid.nodes[center] + Eigen::Vector3d{u(rng), u(rng), 0.0};
        Eigen::VectorXd W;
        Eigen::MatrixXd dW;
        rbf_conv_patch(basis, X, W, dW);
        Eigen::VectorXd Wo = rpim_dense_oracle(grid, patch.members,
                                               cfg.a * patch.spacing, cfg.rbf_exponent, X);
        CHECK((W - Wo).norm() < 1e-9);
    }
}

TEST_CASE("2D assembled convolution shapes: 16 functions, unity, Kronecker") {
    Mesh grid = build_quad_grid(5, 5, 1.0, 1.0);
    ConvConfig cfg{1, 1.0, 1, ConvKernel::rbf, 1.03};
    BasisTable bases(grid, cfg);

    const int e = 2 * 5 + 2; // interior element
    ShapeSample s = conv_sample(grid, e, {0.3, -0.4, 0}, bases);
    CHECK(s.nodes.size() == 16);
    CHECK(s.N.sum() == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(s.B0.rowwise().sum().norm() < 1e-9);

    // Kronecker at an element node: one at that node, zero elsewhere
    const Element& el = grid.elements[e];
    ShapeSample sn = conv_sample(grid, e, parent_node_coord(el.kind, 2), bases);
    for (size_t k = 0; k < sn.nodes.size(); ++k)
        CHECK(sn.N[k] == doctest::Approx(sn.nodes[k] == el.nodes[2] ? 1.0 : 0.0)
                             .epsilon(1e-10));
}

TEST_CASE("derivative consistency of assembled shapes (1D Lagrange path)") {
    Mesh mesh = build_bar(6, 6.0);
    ConvConfig cfg{1, 1.0, 2, ConvKernel::lagrange1d, 1.03};
    BasisTable bases(mesh, cfg);
    for (double xi : {-0.6, 0.1, 0.7}) {
        ShapeSample s = conv_sample(mesh, 2, {xi, 0, 0}, bases);
        const double h = 1e-6;
        ShapeSample sp = conv_sample(mesh, 2, inverse_map(mesh, 2, s.X + Eigen::Vector3d{h, 0, 0}), bases);
        ShapeSample sm = conv_sample(mesh, 2, inverse_map(mesh, 2, s.X - Eigen::Vector3d{h, 0, 0}), bases);
        Eigen::VectorXd fd = (sp.N - sm.N) / (2 * h);
        CHECK((fd - s.B0.row(0).transpose()).norm() / fd.norm() < 1e-5);
    }
}

TEST_CASE("boundary patches expand until the moment problem is solvable") {
    // 2D, p = 2 needs m = 6; edge and corner ring-1 patches are too small or
    // singular and must grow.
    Mesh grid = build_quad_grid(6, 6);
    ConvConfig cfg{1, 1.0, 2, ConvKernel::rbf, 1.03};
    BasisTable bases(grid, cfg);
    const PatchBasis& corner = bases.at(0);
    CHECK(corner.n >= 6);
    Eigen::VectorXd W;
    Eigen::MatrixXd dW;
    rbf_conv_patch(corner, grid.nodes[0], W, dW);
    for (int k = 0; k < corner.n; ++k)
        CHECK(W[k] == doctest::Approx(corner.patch.members[k] == 0 ? 1.0 : 0.0)
                          .epsilon(1e-9));
}

TEST_CASE("inverse isoparametric map round trip") {
    Mesh mesh = build_distorted_quad_grid(4, 4, 0.25, 3);
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int e = 0; e < mesh.element_count(); e += 3) {
        Eigen::Vector3d xi{u(rng), u(rng), 0.0};
        ShapeSample s = fe_sample(mesh, e, xi);
        Eigen::Vector3d back = inverse_map(mesh, e, s.X);
        CHECK((back - xi).norm() < 1e-10);
    }
}
