#include "convfem/quadrature.hpp"

#include <cmath>

namespace convfem {

double QuadratureRule::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

namespace {

// Golub-Welsch: nodes/weights from the symmetric tridiagonal recurrence
// matrix of the orthogonal polynomial family.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                  double mu0, std::vector<double>& x, std::vector<double>& w) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = diag[i];
        if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = offdiag[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        w[i] = mu0 * v0 * v0;
    }
}

// Gauss-Jacobi on [0,1] with weight (1-t)^alpha; used by the collapsed
// simplex product rules. Recurrence coefficients for P^(a,0) on [-1,1].
void gauss_jacobi01(int n, double alpha, std::vector<double>& x, std::vector<double>& w) {
    Eigen::VectorXd diag(n), off(n > 1 ? n - 1 : 0);
    const double a = alpha, b = 0.0;
    diag[0] = (b - a) / (a + b + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + a + b;
        diag[k] = (b * b - a * a) / (s * (s + 2.0));
        const double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
        const double den = (s - 1.0) * s * s * (s + 1.0);
        off[k - 1] = std::sqrt(num / den);
    }
    const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
    std::vector<double> xm, wm;
    golub_welsch(diag, off, mu0, xm, wm);
    // map [-1,1] -> [0,1]: t = (x+1)/2 turns the weight into 2^(a+1) (1-t)^a
    x.resize(n);
    w.resize(n);
    const double scale = std::pow(2.0, -(a + 1.0));
    for (int i = 0; i < n; ++i) {
        x[i] = 0.5 * (xm[i] + 1.0);
        w[i] = wm[i] * scale;
    }
}

int points_for_degree(int degree) { return (degree + 2) / 2; } // ceil((d+1)/2)

QuadratureRule line_rule(int order) {
    return gauss_legendre(points_for_degree(order));
}

QuadratureRule quad_rule(int order) {
    QuadratureRule g = gauss_legendre(points_for_degree(order));
    QuadratureRule r;
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j) {
            r.points.push_back({g.points[i][0], g.points[j][0], 0.0});
            r.weights.push_back(g.weights[i] * g.weights[j]);
        }
    return r;
}

QuadratureRule tri_rule(int order) {
    QuadratureRule r;
    if (order <= 1) {
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 0.0});
        r.weights.push_back(0.5);
        return r;
    }
    if (order == 2) {
        const double a = 2.0 / 3.0, b = 1.0 / 6.0;
        r.points = {{b, b, 0}, {a, b, 0}, {b, a, 0}};
        r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        return r;
    }
    // Collapsed conical product: x = u, y = v(1-u), weight (1-u) from the map.
    const int n = points_for_degree(order);
    std::vector<double> xu, wu, xv, wv;
    gauss_jacobi01(n, 1.0, xu, wu); // weight (1-u)
    gauss_jacobi01(n, 0.0, xv, wv);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            r.points.push_back({xu[i], xv[j] * (1.0 - xu[i]), 0.0});
            r.weights.push_back(wu[i] * wv[j]);
        }
    return r;
}

QuadratureRule tet_rule(int order) {
    QuadratureRule r;
    if (order <= 1) {
        r.points.push_back({0.25, 0.25, 0.25});
        r.weights.push_back(1.0 / 6.0);
        return r;
    }
    if (order == 2) {
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        r.points = {{b, b, b}, {a, b, b}, {b, a, b}, {b, b, a}};
        r.weights.assign(4, 1.0 / 24.0);
        return r;
    }
    // Collapsed conical product: x = u, y = v(1-u), z = w(1-u)(1-v).
    // Keeps all weights positive at any order.
    const int n = points_for_degree(order);
    std::vector<double> xu, wu, xv, wv, xw, ww;
    gauss_jacobi01(n, 2.0, xu, wu); // weight (1-u)^2
    gauss_jacobi01(n, 1.0, xv, wv); // weight (1-v)
    gauss_jacobi01(n, 0.0, xw, ww);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double x = xu[i];
                const double y = xv[j] * (1.0 - x);
                const double z = xw[k] * (1.0 - x) * (1.0 - xv[j]);
                r.points.push_back({x, y, z});
                r.weights.push_back(wu[i] * wv[j] * ww[k]);
            }
    return r;
}

} // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: need at least one point");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k)
        off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    std::vector<double> x, w;
    golub_welsch(diag, off, 2.0, x, w);
    QuadratureRule r;
    for (int i = 0; i < n; ++i) {
        r.points.push_back({x[i], 0.0, 0.0});
        r.weights.push_back(w[i]);
    }
    return r;
}

QuadratureRule quadrature_rule(ElementKind kind, int order) {
    if (order < 1) throw ValidationError("quadrature order must be >= 1");
    if (order > 40) throw ValidationError("unsupported quadrature order");
    switch (kind) {
    case ElementKind::line2: return line_rule(order);
    case ElementKind::quad4: return quad_rule(order);
    case ElementKind::tet4: return tet_rule(order);
    }
    throw ValidationError("unknown element kind");
}

QuadratureRule facet_quadrature_rule(ElementKind kind, int order) {
    if (order < 1) throw ValidationError("quadrature order must be >= 1");
    switch (kind) {
    case ElementKind::line2: { // point facet
        QuadratureRule r;
        r.points.push_back(Eigen::Vector3d::Zero());
        r.weights.push_back(1.0);
        return r;
    }
    case ElementKind::quad4: return line_rule(order);
    case ElementKind::tet4: return tri_rule(order);
    }
    throw ValidationError("unknown element kind");
}

} // namespace convfem
