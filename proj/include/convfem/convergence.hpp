#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "convfem/interp.hpp"

namespace convfem {

enum class StudyProblem { bar1d, plate2d };

StudyProblem study_problem_from_name(const std::string& name);

struct StudyRow {
    int n = 0;        // elements per direction
    double h = 0.0;   // nominal spacing
    double error = 0.0; // L2 displacement error
    bool solved = true;
};

struct StudyResult {
    StudyProblem problem;
    std::vector<std::string> modes;            // "fem" and/or "conv"
    std::vector<std::vector<StudyRow>> rows;   // per mode
    std::vector<double> rates;                 // fitted slope; NaN if < 2 levels
};

// Manufactured-solution static study: solves on each refinement with each
// mode and reports L2 displacement errors and fitted rates. `cfg` configures
// the conv mode (bar1d uses the Lagrange kernel, plate2d the RBF kernel).
StudyResult convergence_study(StudyProblem problem, const std::vector<int>& refinements,
                              const std::vector<std::string>& modes,
                              const ConvConfig& cfg);

void print_study(const StudyResult& result, std::ostream& os);

} // namespace convfem
