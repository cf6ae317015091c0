#include <doctest.h>

#include <cmath>

#include "convfem/quadrature.hpp"

using namespace convfem;

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

// Analytic monomial integrals over the parent domains.
double line_exact(int a) { // int_{-1}^{1} x^a
    return a % 2 ? 0.0 : 2.0 / (a + 1);
}
double quad_exact(int a, int b) { return line_exact(a) * line_exact(b); }
double tet_exact(int a, int b, int c) { // unit simplex
    return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}
double tri_exact(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double apply(const QuadratureRule& r, int a, int b, int c) {
    double s = 0.0;
    for (int i = 0; i < r.size(); ++i)
        s += r.weights[i] * std::pow(r.points[i][0], a) * std::pow(r.points[i][1], b) *
             std::pow(r.points[i][2], c);
    return s;
}

} // namespace

TEST_CASE("named rule sizes and parent measures") {
    QuadratureRule line = quadrature_rule(ElementKind::line2, 5);
    CHECK(line.size() == 3);
    CHECK(line.total_weight() == doctest::Approx(2.0));

    QuadratureRule quad = quadrature_rule(ElementKind::quad4, 3);
    CHECK(quad.size() == 4);
    CHECK(quad.total_weight() == doctest::Approx(4.0));

    QuadratureRule tet = quadrature_rule(ElementKind::tet4, 2);
    CHECK(tet.size() == 4);
    CHECK(tet.total_weight() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("weights are positive") {
    for (int order = 1; order <= 9; ++order)
        for (ElementKind kind : {ElementKind::line2, ElementKind::quad4, ElementKind::tet4})
            for (double w : quadrature_rule(kind, order).weights) CHECK(w > 0.0);
}

TEST_CASE("rules integrate monomials exactly up to the requested degree") {
    for (int order = 1; order <= 8; ++order) {
        QuadratureRule line = quadrature_rule(ElementKind::line2, order);
        for (int a = 0; a <= order; ++a)
            CHECK(apply(line, a, 0, 0) == doctest::Approx(line_exact(a)).epsilon(1e-12));

        QuadratureRule quad = quadrature_rule(ElementKind::quad4, order);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; b <= order; ++b)
                CHECK(apply(quad, a, b, 0) ==
                      doctest::Approx(quad_exact(a, b)).epsilon(1e-12));

        QuadratureRule tet = quadrature_rule(ElementKind::tet4, order);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b)
                for (int c = 0; a + b + c <= order; ++c) {
                    const double got = apply(tet, a, b, c);
                    const double want = tet_exact(a, b, c);
                    CHECK(got == doctest::Approx(want).epsilon(1e-10));
                }
    }
}

TEST_CASE("facet rules match the face parent domains") {
    QuadratureRule point = facet_quadrature_rule(ElementKind::line2, 3);
    CHECK(point.size() == 1);
    CHECK(point.total_weight() == doctest::Approx(1.0));

    QuadratureRule edge = facet_quadrature_rule(ElementKind::quad4, 5);
    CHECK(edge.total_weight() == doctest::Approx(2.0));

    for (int order = 1; order <= 7; ++order) {
        QuadratureRule tri = facet_quadrature_rule(ElementKind::tet4, order);
        CHECK(tri.total_weight() == doctest::Approx(0.5));
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b)
                CHECK(apply(tri, a, b, 0) ==
                      doctest::Approx(tri_exact(a, b)).epsilon(1e-10));
    }
}

TEST_CASE("invalid orders are rejected") {
    CHECK_THROWS_AS(quadrature_rule(ElementKind::line2, 0), ValidationError);
    CHECK_THROWS_AS(quadrature_rule(ElementKind::quad4, 99), ValidationError);
}
