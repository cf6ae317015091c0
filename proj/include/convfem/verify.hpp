#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "convfem/adaptivity.hpp"
#include "convfem/mesh.hpp"

namespace convfem {

enum class VerifyLevel { fast, full };

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Test hooks: deliberate fault injection for meta-testing the suites.
struct VerifyHooks {
    double b0_perturb = 0.0;   // added to one B0 entry before the FD check
    int quad_order_override = 0; // forces this quadrature degree everywhere
};

// Runs the interpolation/FD/patch-test/degeneracy/energy suites and returns
// one result per check. All meshes are built internally.
std::vector<CheckResult> verify_suite(VerifyLevel level, const VerifyHooks& hooks = {});

bool print_verify_report(const std::vector<CheckResult>& results, std::ostream& os);

// Constant-deformation patch test on a distorted quad grid: essential BCs
// u = (Fbar - I) X on the whole boundary, zero loads, static solve.
struct PatchTestResult {
    double max_F_error = 0.0;          // max |F - Fbar| over all quadrature points
    double residual_ratio = 0.0;       // |f_int free| / |f_int constrained|
};
PatchTestResult run_patch_test(const Mesh& mesh, EnrichmentMode mode,
                               const ConvConfig& cfg, int quad_order = 0,
                               int order_boost = 0);

// Same patch test with an interior island of conv elements inside a plain
// mesh; F error is reported over plain elements whose patches do not touch
// the island.
PatchTestResult run_hybrid_island_patch_test(int n, const ConvConfig& cfg,
                                             int order_boost = 0);

} // namespace convfem
