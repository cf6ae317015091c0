#include "convfem/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "convfem/meshbuild.hpp"

namespace convfem {

namespace fs = std::filesystem;

namespace {

int direction_index(char c) {
    switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    }
    throw ValidationError(std::string("bad direction '") + c + "' (expected x|y|z)");
}

HistoryCurve parse_history(const std::string& text, int lineno) {
    HistoryCurve curve;
    std::string chunk;
    std::istringstream is(text);
    while (std::getline(is, chunk, ',')) {
        std::istringstream pair(chunk);
        double t, v;
        if (!(pair >> t >> v))
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": bad history pair '" + chunk + "'");
        std::string rest;
        if (pair >> rest)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": trailing tokens in history pair '" + chunk + "'");
        curve.points.emplace_back(t, v);
    }
    curve.validate();
    return curve;
}

struct ConfigLine {
    std::string section;
    std::vector<std::string> tokens;
    std::string history; // text after ':' when present
    int lineno = 0;
};

std::vector<ConfigLine> lex_config(const std::string& text) {
    std::vector<ConfigLine> out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string history;
        const size_t colon = line.find(':');
        if (colon != std::string::npos) {
            history = line.substr(colon + 1);
            line.erase(colon);
        }
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty()) continue;
        if (toks[0].front() == '[' && toks[0].back() == ']') {
            section = toks[0].substr(1, toks[0].size() - 2);
            continue;
        }
        out.push_back({section, toks, history, lineno});
    }
    return out;
}

double parse_real(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config line " + std::to_string(lineno) + ": bad number '" +
                              s + "'");
    }
}

int parse_int(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": bad integer '" + s + "'");
    }
}

[[noreturn]] void bad_line(const ConfigLine& l, const std::string& why) {
    throw ValidationError("config line " + std::to_string(l.lineno) + ": " + why);
}

const std::vector<int>& find_nodeset(const Mesh& mesh, const std::string& name) {
    auto it = mesh.nodesets.find(name);
    if (it == mesh.nodesets.end())
        throw ValidationError("unknown nodeset '" + name + "'");
    return it->second;
}

const std::vector<int>& find_facetset(const Mesh& mesh, const std::string& name) {
    auto it = mesh.facetsets.find(name);
    if (it == mesh.facetsets.end())
        throw ValidationError("unknown facetset '" + name + "'");
    return it->second;
}

} // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& base_dir,
                             const std::string& name) {
    Scenario sc;
    sc.name = name;
    double mu0 = 0, k0 = 0, c10 = 0, d1 = 0, rho0 = 0;
    struct PendingEssential {
        std::string set;
        int dir;
        HistoryCurve curve;
    };
    std::vector<PendingEssential> essentials;
    struct PendingTraction {
        std::string set;
        int dir;
        HistoryCurve curve;
    };
    std::vector<PendingTraction> tractions;

    for (const ConfigLine& l : lex_config(text)) {
        const std::string& key = l.tokens[0];
        if (l.section.empty()) {
            if (key == "mesh" && l.tokens.size() == 2) {
                fs::path p = l.tokens[1];
                if (p.is_relative()) p = fs::path(base_dir) / p;
                sc.mesh_path = p.string();
            } else {
                bad_line(l, "expected 'mesh <path>' before the first section");
            }
        } else if (l.section == "material") {
            if (l.tokens.size() != 2) bad_line(l, "expected '<key> <value>'");
            const double v = parse_real(l.tokens[1], l.lineno);
            if (key == "mu0") mu0 = v;
            else if (key == "k0") k0 = v;
            else if (key == "c10") c10 = v;
            else if (key == "d1") d1 = v;
            else if (key == "rho0") rho0 = v;
            else bad_line(l, "unknown material key '" + key + "'");
        } else if (l.section == "interpolation") {
            if (l.tokens.size() != 2) bad_line(l, "expected '<key> <value>'");
            if (key == "kernel") {
                if (l.tokens[1] == "rbf") sc.conv.kernel = ConvKernel::rbf;
                else if (l.tokens[1] == "lagrange1d") sc.conv.kernel = ConvKernel::lagrange1d;
                else bad_line(l, "unknown kernel '" + l.tokens[1] + "'");
            } else if (key == "s") sc.conv.s = parse_int(l.tokens[1], l.lineno);
            else if (key == "p") sc.conv.p = parse_int(l.tokens[1], l.lineno);
            else if (key == "a") sc.conv.a = parse_real(l.tokens[1], l.lineno);
            else if (key == "q") sc.conv.rbf_exponent = parse_real(l.tokens[1], l.lineno);
            else bad_line(l, "unknown interpolation key '" + key + "'");
        } else if (l.section == "enrichment") {
            if (key == "default" && l.tokens.size() == 2)
                sc.default_mode = enrichment_mode_from_name(l.tokens[1]);
            else if (key == "region" && l.tokens.size() == 3)
                sc.region_modes[l.tokens[1]] = enrichment_mode_from_name(l.tokens[2]);
            else bad_line(l, "expected 'default <mode>' or 'region <tag> <mode>'");
        } else if (l.section == "solver") {
            if (l.tokens.size() != 2) bad_line(l, "expected '<key> <value>'");
            if (key == "mode") {
                if (l.tokens[1] == "explicit_cd") sc.solver.mode = SolverMode::explicit_cd;
                else if (l.tokens[1] == "incremental_min")
                    sc.solver.mode = SolverMode::incremental_min;
                else bad_line(l, "unknown solver mode '" + l.tokens[1] + "'");
            } else if (key == "dt") sc.solver.dt = parse_real(l.tokens[1], l.lineno);
            else if (key == "steps") sc.solver.steps = parse_int(l.tokens[1], l.lineno);
            else if (key == "mass") {
                if (l.tokens[1] == "lumped") sc.solver.lumped_mass = true;
                else if (l.tokens[1] == "consistent") sc.solver.lumped_mass = false;
                else bad_line(l, "mass must be lumped|consistent");
            } else if (key == "newton_tol")
                sc.solver.newton_tol = parse_real(l.tokens[1], l.lineno);
            else if (key == "newton_max_iters")
                sc.solver.newton_max_iters = parse_int(l.tokens[1], l.lineno);
            else if (key == "quadrature_order")
                sc.solver.quad_order = parse_int(l.tokens[1], l.lineno);
            else bad_line(l, "unknown solver key '" + key + "'");
        } else if (l.section == "loads") {
            if (key == "fix") {
                if (l.tokens.size() != 3) bad_line(l, "expected 'fix <nodeset> <dirs>'");
                for (char c : l.tokens[2]) {
                    HistoryCurve zero;
                    zero.points = {{0.0, 0.0}, {1e30, 0.0}};
                    essentials.push_back({l.tokens[1], direction_index(c), zero});
                }
            } else if (key == "prescribe") {
                if (l.tokens.size() != 3 || l.history.empty())
                    bad_line(l, "expected 'prescribe <nodeset> <dir> : t v, ...'");
                essentials.push_back({l.tokens[1], direction_index(l.tokens[2][0]),
                                      parse_history(l.history, l.lineno)});
            } else if (key == "traction") {
                if (l.tokens.size() != 3 || l.history.empty())
                    bad_line(l, "expected 'traction <facetset> <dir> : t v, ...'");
                tractions.push_back({l.tokens[1], direction_index(l.tokens[2][0]),
                                     parse_history(l.history, l.lineno)});
            } else if (key == "body") {
                if (l.tokens.size() != 2 || l.history.empty())
                    bad_line(l, "expected 'body <dir> : t v, ...'");
                sc.loads.body.push_back(
                    {direction_index(l.tokens[1][0]), parse_history(l.history, l.lineno)});
            } else {
                bad_line(l, "unknown load keyword '" + key + "'");
            }
        } else if (l.section == "output") {
            if (key == "directory" && l.tokens.size() == 2) sc.output.directory = l.tokens[1];
            else if (key == "csv" && l.tokens.size() == 2) sc.output.csv = l.tokens[1];
            else if (key == "snapshot_every" && l.tokens.size() == 2)
                sc.output.snapshot_every = parse_int(l.tokens[1], l.lineno);
            else if (key == "monitor" && l.tokens.size() >= 3) {
                MonitorSpec m;
                if (l.tokens[1] == "node") {
                    m.node = parse_int(l.tokens[2], l.lineno);
                } else if (l.tokens[1] == "nearest") {
                    m.nearest = true;
                    for (size_t c = 0; c + 2 < l.tokens.size() && c < 3; ++c)
                        m.coord[c] = parse_real(l.tokens[2 + c], l.lineno);
                } else {
                    bad_line(l, "monitor must be 'node <id>' or 'nearest <coords>'");
                }
                sc.output.monitors.push_back(m);
            } else {
                bad_line(l, "unknown output key '" + key + "'");
            }
        } else {
            bad_line(l, "unknown section '" + l.section + "'");
        }
    }

    if (sc.mesh_path.empty()) throw ValidationError("config: missing 'mesh <path>'");
    std::ifstream mf(sc.mesh_path);
    if (!mf) throw ValidationError("cannot open mesh file '" + sc.mesh_path + "'");
    std::stringstream buf;
    buf << mf.rdbuf();
    sc.mesh = parse_mesh(buf.str());

    if (rho0 <= 0.0) throw ValidationError("config: material rho0 must be set positive");
    if (c10 > 0.0 && d1 > 0.0) {
        sc.mat = NeoHookean{c10, d1, rho0};
    } else if (mu0 > 0.0 && k0 > 0.0) {
        sc.mat = from_moduli(mu0, k0, rho0);
    } else {
        throw ValidationError("config: material needs c10+d1 or mu0+k0");
    }
    sc.mat.validate();

    for (const auto& e : essentials) {
        EssentialBC bc;
        bc.nodeset = e.set;
        bc.nodes = find_nodeset(sc.mesh, e.set);
        bc.dir = e.dir;
        bc.curve = e.curve;
        if (bc.dir >= sc.mesh.dimension)
            throw ValidationError("essential BC direction exceeds mesh dimension");
        sc.loads.essential.push_back(std::move(bc));
    }
    for (const auto& t : tractions) {
        TractionBC bc;
        bc.facetset = t.set;
        bc.facets = find_facetset(sc.mesh, t.set);
        bc.dir = t.dir;
        bc.curve = t.curve;
        if (bc.dir >= sc.mesh.dimension)
            throw ValidationError("traction direction exceeds mesh dimension");
        sc.loads.tractions.push_back(std::move(bc));
    }
    for (const BodyForceBC& b : sc.loads.body)
        if (b.dir >= sc.mesh.dimension)
            throw ValidationError("body force direction exceeds mesh dimension");

    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_scenario_text(buf.str(), fs::path(path).parent_path().string(),
                               fs::path(path).stem().string());
}

void Scenario::resolve(std::ostream* log) {
    solver.validate();
    conv.validate(mesh.dimension);
    loads.monitors.clear();
    for (MonitorSpec& m : output.monitors) {
        if (m.nearest) {
            double best = std::numeric_limits<double>::max();
            int pick = -1;
            for (int n = 0; n < mesh.node_count(); ++n) {
                const double dist = (mesh.nodes[n] - m.coord).norm();
                if (dist < best - 1e-15) {
                    best = dist;
                    pick = n;
                }
            }
            m.resolved = pick;
            if (log)
                *log << "monitor: nearest node to (" << m.coord.transpose() << ") is "
                     << pick << " at (" << mesh.nodes[pick].transpose() << ")\n";
        } else {
            if (m.node < 0 || m.node >= mesh.node_count())
                throw ValidationError("monitored node " + std::to_string(m.node) +
                                      " does not exist");
            m.resolved = m.node;
        }
        loads.monitors.push_back(m.resolved);
    }
}

namespace {

std::string config_summary(const Scenario& sc) {
    std::ostringstream os;
    os << "kernel=" << (sc.conv.kernel == ConvKernel::rbf ? "rbf" : "lagrange1d")
       << " q=" << sc.conv.rbf_exponent << " a=" << sc.conv.a << " s=" << sc.conv.s
       << " p=" << sc.conv.p << " default=" << enrichment_mode_name(sc.default_mode)
       << " mode="
       << (sc.solver.mode == SolverMode::explicit_cd ? "explicit_cd" : "incremental_min")
       << " mass=" << (sc.solver.lumped_mass ? "lumped" : "consistent")
       << " dt=" << sc.solver.dt << " steps=" << sc.solver.steps
       << " quad_order=" << sc.solver.quad_order << " vonmises=cauchy";
    return os.str();
}

} // namespace

RunReport run_scenario(Scenario& sc, std::ostream& log) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    sc.resolve(&log);
    EnrichmentMap map = classify_enrichment(sc.mesh, sc.region_modes, sc.default_mode,
                                            sc.conv);
    BasisTable bases;
    if (map.any_conv()) {
        if (sc.conv.kernel == ConvKernel::lagrange1d && sc.mesh.dimension != 1)
            throw ValidationError("lagrange1d kernel requires a 1D mesh");
        bases = BasisTable(sc.mesh, sc.conv, map.conv_nodes(sc.mesh));
    }
    System sys(sc.mesh, sc.mat, map, bases, sc.loads, sc.solver);

    const double dt_crit = sys.dt_critical_estimate();
    log << "scenario '" << sc.name << "': " << sc.mesh.node_count() << " nodes, "
        << sc.mesh.element_count() << " elements, dim " << sc.mesh.dimension << "\n";
    log << "config: " << config_summary(sc) << "\n";
    log << "stability: dt = " << sc.solver.dt << ", dt_crit ~ " << dt_crit << "\n";
    if (sc.solver.mode == SolverMode::explicit_cd && sc.solver.dt > 0.9 * dt_crit)
        log << "warning: dt exceeds 0.9 * dt_crit; expect instability\n";

    Stepper stepper(sys, sc.solver);
    stepper.initialize();

    // outputs
    CsvWriter csv;
    fs::path outdir;
    const bool write_files = !sc.output.directory.empty();
    if (write_files) {
        outdir = sc.output.directory;
        fs::create_directories(outdir);
        std::vector<std::string> meta = {
            "scenario=" + sc.name,
            "mesh=" + sc.mesh_path + " nodes=" + std::to_string(sc.mesh.node_count()) +
                " elements=" + std::to_string(sc.mesh.element_count()),
            "material c10=" + std::to_string(sc.mat.c10) + " d1=" +
                std::to_string(sc.mat.d1) + " rho0=" + std::to_string(sc.mat.rho0),
            config_summary(sc),
        };
        std::vector<std::string> cols = {"t"};
        for (const MonitorSpec& m : sc.output.monitors) {
            const std::string tag = "n" + std::to_string(m.resolved);
            cols.push_back(tag + "_ux");
            if (sc.mesh.dimension > 1) cols.push_back(tag + "_uy");
            if (sc.mesh.dimension > 2) cols.push_back(tag + "_uz");
            cols.push_back(tag + "_vm");
            cols.push_back(tag + "_sed");
            meta.push_back("monitor " + tag + " at (" +
                           std::to_string(sc.mesh.nodes[m.resolved][0]) + ", " +
                           std::to_string(sc.mesh.nodes[m.resolved][1]) + ", " +
                           std::to_string(sc.mesh.nodes[m.resolved][2]) + ")");
        }
        cols.insert(cols.end(), {"w_kin", "w_int", "w_ext", "balance"});
        csv.open((outdir / sc.output.csv).string(), meta, cols);
    }

    RunReport report;
    report.steps = sc.solver.steps;

    auto emit_row = [&]() {
        const State& st = stepper.state();
        EnergyReport er = stepper.energy_report();
        report.max_abs_balance = std::max(report.max_abs_balance, std::abs(er.balance()));
        report.max_energy_scale = std::max(
            report.max_energy_scale, std::max({er.w_kin, std::abs(er.w_int), std::abs(er.w_ext)}));
        if (!write_files) return;
        std::vector<double> row = {st.t};
        for (const MonitorSpec& m : sc.output.monitors) {
            for (int c = 0; c < sc.mesh.dimension; ++c)
                row.push_back(st.d[sys.dofs()(m.resolved, c)]);
            double vm, sed;
            monitor_stress_at(sc.mesh, map, bases, sc.mat, st.d, sys.dofs(), m.resolved,
                              vm, sed);
            row.push_back(vm);
            row.push_back(sed);
        }
        row.insert(row.end(), {er.w_kin, er.w_int, er.w_ext, er.balance()});
        csv.append(row);
    };

    auto emit_vtk = [&](int step) {
        if (!write_files) return;
        FieldSnapshot fields =
            recover_fields(sc.mesh, sys.tables(), sc.mat, stepper.state().d, sys.dofs());
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06d.vtk", step);
        write_vtk((outdir / name).string(), sc.mesh, stepper.state().d, sys.dofs(), fields,
                  sc.name + " t=" + std::to_string(stepper.state().t) + " " +
                      config_summary(sc));
    };

    const auto t1 = clock::now();
    report.setup_seconds = std::chrono::duration<double>(t1 - t0).count();

    emit_row();
    if (sc.output.snapshot_every > 0) emit_vtk(0);
    for (int n = 1; n <= sc.solver.steps; ++n) {
        stepper.step();
        emit_row();
        if (sc.output.snapshot_every > 0 && n % sc.output.snapshot_every == 0) emit_vtk(n);
    }
    const auto t2 = clock::now();
    report.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
    report.per_step_seconds =
        sc.solver.steps > 0 ? report.solve_seconds / sc.solver.steps : 0.0;

    if (write_files && (sc.output.snapshot_every == 0 ||
                        sc.solver.steps % sc.output.snapshot_every != 0))
        emit_vtk(sc.solver.steps);

    report.final_energy = stepper.energy_report();
    if (write_files) report.csv_path = (outdir / sc.output.csv).string();

    log << "timing: setup " << report.setup_seconds << " s, solve " << report.solve_seconds
        << " s (" << report.per_step_seconds << " s/step over " << sc.solver.steps
        << " steps)\n";
    log << "energy: W_kin=" << report.final_energy.w_kin
        << " W_int=" << report.final_energy.w_int << " W_ext=" << report.final_energy.w_ext
        << " balance=" << report.final_energy.balance() << "\n";
    return report;
}

RunReport run_scenario_file(const std::string& path, std::ostream& log) {
    Scenario sc = parse_scenario_file(path);
    return run_scenario(sc, log);
}

namespace {
void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write '" + path.string() + "'");
    os << text;
}
} // namespace

void write_bundled_scenarios(const std::string& dir) {
    fs::create_directories(dir);
    const fs::path root(dir);

    Mesh notch = build_notched_plate(30, 16);
    write_text(root / "notch_coarse.mesh", serialize_mesh(notch));

    const std::string notch_common =
        "mesh notch_coarse.mesh\n"
        "\n"
        "[material]\n"
        "c10 115385.0\n"
        "d1 4.0e-6\n"
        "rho0 1000.0\n"
        "\n"
        "[interpolation]\n"
        "kernel rbf\n"
        "s 1\n"
        "p 1\n"
        "a 1.0\n"
        "q 1.03\n"
        "\n"
        "[solver]\n"
        "mode explicit_cd\n"
        "dt 1.25e-4\n"
        "steps 320\n"
        "mass lumped\n"
        "\n"
        "[loads]\n"
        "fix bottom xy\n"
        "prescribe top x : 0 0, 0.04 0.02\n"
        "prescribe top y : 0 0, 0.04 0.03\n"
        "\n"
        "[output]\n"
        "csv history.csv\n"
        "monitor nearest 0.1 0.15\n"
        "snapshot_every 0\n";

    write_text(root / "notch_ramp_conv.cfg", notch_common +
                                                 "directory out/notch_conv\n"
                                                 "\n[enrichment]\ndefault conv\n");
    write_text(root / "notch_ramp_fem.cfg", notch_common +
                                                "directory out/notch_fem\n"
                                                "\n[enrichment]\ndefault fem\n");
    write_text(root / "notch_ramp_hybrid.cfg",
               notch_common + "directory out/notch_hybrid\n"
                              "\n[enrichment]\ndefault fem\nregion notch conv\n");

    Mesh flight = build_quad_grid(2, 1, 2.0, 1.0);
    write_text(root / "free_flight.mesh", serialize_mesh(flight));
    write_text(root / "free_flight.cfg",
               "mesh free_flight.mesh\n"
               "\n"
               "[material]\n"
               "mu0 1000.0\n"
               "k0 3000.0\n"
               "rho0 100.0\n"
               "\n"
               "[interpolation]\n"
               "kernel rbf\n"
               "s 1\n"
               "p 1\n"
               "\n"
               "[enrichment]\n"
               "default fem\n"
               "\n"
               "[solver]\n"
               "mode explicit_cd\n"
               "dt 1e-3\n"
               "steps 100\n"
               "mass lumped\n"
               "\n"
               "[loads]\n"
               "body y : 0 -9.81, 1 -9.81\n"
               "\n"
               "[output]\n"
               "directory out/free_flight\n"
               "csv history.csv\n"
               "monitor node 0\n"
               "snapshot_every 0\n");
}

} // namespace convfem
