#include <CLI11.hpp>
#include <iostream>

#include "convfem/convergence.hpp"
#include "convfem/scenario.hpp"
#include "convfem/verify.hpp"

using namespace convfem;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear solid dynamics with convolution-enriched FE interpolation"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "scenario config file")->required();

    std::string level = "fast";
    CLI::App* verify = app.add_subcommand("verify", "run the built-in property suites");
    verify->add_option("--level", level, "fast|full")
        ->check(CLI::IsMember({"fast", "full"}));

    std::string problem, refinements_arg = "8,16,32,64", modes_arg = "fem,conv";
    int study_p = 2;
    int study_s = 1;
    double study_a = 1.0;
    CLI::App* conv = app.add_subcommand("convergence", "manufactured-solution rate study");
    conv->add_option("problem", problem, "bar1d|plate2d")->required();
    conv->add_option("--refinements", refinements_arg, "ascending element counts");
    conv->add_option("--modes", modes_arg, "comma list of fem,conv");
    conv->add_option("--p", study_p, "reproducing order of the conv mode");
    conv->add_option("--s", study_s, "patch size of the conv mode");
    conv->add_option("--a", study_a, "dilation parameter of the conv mode");

    std::string bundle_dir = "scenarios";
    CLI::App* bundle = app.add_subcommand("bundle", "write the bundled example scenarios");
    bundle->add_option("dir", bundle_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            run_scenario_file(config_path, std::cout);
            return 0;
        }
        if (*verify) {
            const VerifyLevel lv = level == "full" ? VerifyLevel::full : VerifyLevel::fast;
            const bool ok = print_verify_report(verify_suite(lv), std::cout);
            return ok ? 0 : 2;
        }
        if (*conv) {
            std::vector<int> refinements;
            for (const std::string& tok : split_csv(refinements_arg))
                refinements.push_back(std::stoi(tok));
            ConvConfig cfg;
            cfg.p = study_p;
            cfg.s = study_s;
            cfg.a = study_a;
            StudyResult result = convergence_study(study_problem_from_name(problem),
                                                   refinements, split_csv(modes_arg), cfg);
            print_study(result, std::cout);
            return 0;
        }
        if (*bundle) {
            write_bundled_scenarios(bundle_dir);
            std::cout << "wrote bundled scenarios to " << bundle_dir << "\n";
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
