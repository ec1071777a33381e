// fw: command-line front end for the relativistic wave-equation
// block-diagonalization toolkit. Scenarios are strict JSON documents (or
// built-in preset names); each run prints one summary document to stdout and
// optionally writes it, plus any trajectory dump, under --out.
//
// Exit codes: 0 success, 2 malformed scenario or command line, 3 validity
// failure (inconsistent fields, broken structural invariant, semiclassical
// regime violation), 4 numerical failure (lost spectral gap, singular square
// root, step-size underflow), 5 I/O failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fwt/errors.hpp"
#include "fwt/scenario.hpp"

namespace {

struct CliOptions {
    std::string scenario;
    std::string out_dir;
    int jobs = 1;
    std::string hbar_scale;
    double tolerance = 0.0;
    long long seed = -1;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw fwt::ParseError("--hbar-scale: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw fwt::ParseError("--hbar-scale: empty list");
    return out;
}

fwt::Scenario load_scenario(const std::string& ref) {
    if (const auto preset = fwt::scenario_preset(ref))
        return fwt::parse_scenario_json(*preset, ref);
    return fwt::parse_scenario_file(ref);
}

std::string join_out(const std::string& out_dir, const std::string& path) {
    if (path.empty() || out_dir.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(out_dir) / p).string();
}

int run_task(const std::string& task, const CliOptions& cli) {
    if (cli.scenario.empty()) throw fwt::ParseError("--scenario is required");

    if (!cli.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cli.out_dir, ec);
        if (ec) throw fwt::IoError("cannot create output directory: " + cli.out_dir);
    }

    if (task == "validate") {
        const fwt::RunOutcome res = fwt::validate_scenario(cli.scenario);
        std::cout << fwt::dump_summary(res.summary);
        return res.exit_code;
    }

    fwt::Scenario sc = load_scenario(cli.scenario);
    sc.task = task;
    if (!cli.hbar_scale.empty()) sc.hbar_list = parse_double_list(cli.hbar_scale);
    if (cli.tolerance > 0.0) sc.tolerance = cli.tolerance;
    if (cli.seed >= 0) sc.seed = static_cast<unsigned long>(cli.seed);
    sc.summary_path = join_out(cli.out_dir, sc.summary_path);
    sc.trajectory_path = join_out(cli.out_dir, sc.trajectory_path);
    if (!cli.out_dir.empty() && sc.summary_path.empty())
        sc.summary_path = join_out(cli.out_dir, "summary.json");

    const fwt::RunOutcome res = fwt::run_scenario(sc, cli.jobs);
    const std::string text = fwt::dump_summary(res.summary);
    if (!sc.summary_path.empty()) {
        std::ofstream out(sc.summary_path);
        if (!out) throw fwt::IoError("cannot open output file: " + sc.summary_path);
        out << text;
        if (!out) throw fwt::IoError("write failed: " + sc.summary_path);
    }
    std::cout << text;
    return res.exit_code;
}

int list_presets() {
    std::printf("%-32s %-9s %s\n", "name", "kind", "summary");
    for (const fwt::PresetInfo& p : fwt::preset_catalog())
        std::printf("%-32s %-9s %s\n", p.name.c_str(), p.kind.c_str(),
                    p.summary.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Block-diagonalization toolkit for relativistic wave equations: "
        "transforms, oracles, scaling probes and semiclassical dynamics."};
    app.require_subcommand(1);

    CliOptions cli;
    app.add_option("--scenario", cli.scenario,
                   "Scenario JSON file or built-in scenario preset name");
    app.add_option("--out", cli.out_dir,
                   "Directory for summary and trajectory files");
    app.add_option("--jobs", cli.jobs, "Worker threads for per-hbar probe builds")
        ->check(CLI::PositiveNumber);
    app.add_option("--hbar-scale", cli.hbar_scale,
                   "Comma-separated hbar values overriding the scenario list");
    app.add_option("--tolerance", cli.tolerance,
                   "Comparison tolerance override for structure checks");
    app.add_option("--seed", cli.seed, "Random seed override");

    const char* task_help[][2] = {
        {"transform", "Block-diagonalize the scenario Hamiltonian and report residuals"},
        {"simulate", "Integrate the semiclassical trajectory and spin precession"},
        {"ehrenfest", "Wavepacket force-correspondence check on a grid"},
        {"probe", "Planck-constant scaling probe of the transform residuals"},
        {"check", "Field consistency and Hamiltonian structure checks"},
        {"validate", "Parse and validate a scenario without running it"},
    };
    for (const auto& t : task_help) {
        CLI::App* sub = app.add_subcommand(t[0], t[1]);
        sub->fallthrough();
    }
    app.add_subcommand("presets", "List built-in field, particle and scenario presets")
        ->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string task = app.get_subcommands().front()->get_name();
    try {
        if (task == "presets") return list_presets();
        return run_task(task, cli);
    } catch (const fwt::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fwt::SingularSqrt& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fwt::GapClosure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fwt::StiffnessError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fwt::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const fwt::ValidityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::FieldConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::FieldDomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::InvalidBasis& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::NotExactCase& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::Unsupported& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fwt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
