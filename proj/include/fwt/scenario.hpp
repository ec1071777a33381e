#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fwt/fields.hpp"
#include "fwt/particle.hpp"
#include "fwt/semiclassical.hpp"

namespace fwt {

using Json = nlohmann::ordered_json;

// A scenario is one strict JSON document: unknown keys anywhere are
// rejected, all file references must resolve at load time, and identical
// scenario + seed reruns must serialize byte-identical summaries.
struct Scenario {
    std::string task;  // transform | simulate | ehrenfest | probe | check
    ParticleParams particle;

    std::string model = "dirac-pauli";  // or feshbach-villars
    std::string field_preset;           // empty when a table is used
    Json field_args;                    // preset parameters
    std::string field_table;            // CSV path (resolved via FW_DATA_DIR)
    double table_length_scale = 0.0;

    // discretization
    std::string disc_type = "grid";  // grid | momentum
    int grid_n = 128;
    double grid_length = 20.0;
    double transverse_py = 0.0, transverse_pz = 0.0;
    std::vector<Vec3> momenta = {Vec3::Zero()};  // momentum-block list

    // controls
    double t_end = 0.0;
    double rel_tol = 1e-10, abs_tol = 1e-12;
    double tolerance = 1e-10;  // generic comparison tolerance (check task)
    double dt = 0.1;           // ehrenfest centered-difference half width
    std::vector<double> hbar_list;
    unsigned long seed = 0;
    bool allow_invalid = false;

    // initial conditions
    PhaseSpinState initial;
    bool has_initial = false;
    double packet_x0 = 0.0, packet_p0 = 0.0, packet_sigma = 1.0;
    std::vector<Complex> packet_spinor;
    bool has_packet = false;

    std::string summary_path;     // empty: stdout
    std::string trajectory_path;  // empty: no trajectory dump
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_json(const Json& doc, const std::string& origin);

struct RunOutcome {
    int exit_code = 0;
    Json summary;
};

// Execute the scenario's task and build its summary document. Throws the
// library error types; the CLI maps them to exit codes.
RunOutcome run_scenario(const Scenario& sc, int jobs = 1);

// Validation only: parse, resolve files, build fields, check consistency.
RunOutcome validate_scenario(const std::string& path);

struct PresetInfo {
    std::string name;
    std::string kind;  // field | particle | scenario
    std::string summary;
};
const std::vector<PresetInfo>& preset_catalog();

// Built-in complete scenarios by name (used by `fw` when --scenario names a
// preset instead of a file).
std::optional<Json> scenario_preset(const std::string& name);

FieldConfiguration build_fields(const Scenario& sc);

// Serialize with fixed formatting: every double rounded through "%.12e"
// before insertion so repeated runs print byte-identical text.
double round_fixed(double v);
Json round_fixed_json(const Json& v);
std::string dump_summary(const Json& summary);

}  // namespace fwt
