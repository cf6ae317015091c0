#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convfem/adaptivity.hpp"
#include "convfem/dynamics.hpp"
#include "convfem/mesh.hpp"
#include "convfem/output.hpp"

namespace convfem {

struct MonitorSpec {
    bool nearest = false;
    int node = -1;                                   // explicit id
    Eigen::Vector3d coord = Eigen::Vector3d::Zero(); // nearest-node target
    int resolved = -1;
};

struct OutputSpec {
    std::string directory;
    std::string csv = "history.csv";
    int snapshot_every = 0; // VTK cadence in steps; 0 = final snapshot only
    std::vector<MonitorSpec> monitors;
};

// One simulation: mesh + material + interpolation + enrichment + loads +
// solver + outputs.
struct Scenario {
    std::string name = "scenario";
    std::string mesh_path;
    Mesh mesh;
    NeoHookean mat;
    ConvConfig conv;
    EnrichmentMode default_mode = EnrichmentMode::plain_fe;
    std::map<std::string, EnrichmentMode> region_modes;
    LoadCase loads;
    SolverConfig solver;
    OutputSpec output;

    // Fills loads.monitors from output.monitors and validates cross-references.
    void resolve(std::ostream* log = nullptr);
};

// Parses the scenario config grammar; relative mesh paths resolve against
// base_dir.
Scenario parse_scenario_text(const std::string& text, const std::string& base_dir,
                             const std::string& name = "scenario");
Scenario parse_scenario_file(const std::string& path);

struct RunReport {
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    int steps = 0;
    double per_step_seconds = 0.0;
    std::string csv_path;
    EnergyReport final_energy;
    double max_abs_balance = 0.0;   // max |W_kin + W_int - W_ext| over the run
    double max_energy_scale = 0.0;  // max of max(W_kin, W_int, W_ext) over the run
};

RunReport run_scenario(Scenario& scenario, std::ostream& log);

// Convenience wrapper used by the CLI: parse, run, report.
RunReport run_scenario_file(const std::string& path, std::ostream& log);

// Writes the bundled example scenarios (meshes + configs) into `dir`.
void write_bundled_scenarios(const std::string& dir);

} // namespace convfem
