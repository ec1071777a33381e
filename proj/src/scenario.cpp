#include "fwt/scenario.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fwt/fw_transform.hpp"
#include "fwt/hamiltonians.hpp"
#include "fwt/matrix_functions.hpp"
#include "fwt/quantum_oracle.hpp"

namespace fwt {

namespace {

// ---------------------------------------------------------------- formatting

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

Json vec3_json(const Vec3& v) {
    return Json::array({round_fixed(v.x()), round_fixed(v.y()), round_fixed(v.z())});
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// ------------------------------------------------------------- strict parser

// Wrapper enforcing the unknown-key rule: every key must be consumed, and
// finish() names any leftovers.
class StrictView {
public:
    StrictView(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ParseError(where_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string get_string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const Json& v = raw(key);
        if (!v.is_string()) throw ParseError(where_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    std::string require_string(const std::string& key) {
        if (!has(key)) throw ParseError(where_ + ": missing required key '" + key + "'");
        return get_string(key, "");
    }

    double get_double(const std::string& key, double def) {
        if (!has(key)) return def;
        const Json& v = raw(key);
        if (!v.is_number()) throw ParseError(where_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    long get_integer(const std::string& key, long def) {
        if (!has(key)) return def;
        const Json& v = raw(key);
        if (!v.is_number_integer())
            throw ParseError(where_ + "." + key + ": expected an integer");
        return v.get<long>();
    }

    bool get_bool(const std::string& key, bool def) {
        if (!has(key)) return def;
        const Json& v = raw(key);
        if (!v.is_boolean()) throw ParseError(where_ + "." + key + ": expected a boolean");
        return v.get<bool>();
    }

    Vec3 get_vec3(const std::string& key, const Vec3& def) {
        if (!has(key)) return def;
        return parse_vec3(raw(key), where_ + "." + key);
    }

    std::vector<double> get_double_list(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_array()) throw ParseError(where_ + "." + key + ": expected an array");
        std::vector<double> out;
        for (const Json& e : v) {
            if (!e.is_number())
                throw ParseError(where_ + "." + key + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ParseError(where_ + ": unknown key '" + it.key() + "'");
    }

    static Vec3 parse_vec3(const Json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 3)
            throw ParseError(where + ": expected an array of three numbers");
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number())
                throw ParseError(where + ": expected an array of three numbers");
            out[i] = v[i].get<double>();
        }
        return out;
    }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

std::string resolve_data_path(const std::string& path) {
    if (std::ifstream(path).good()) return path;
    if (const char* dir = std::getenv("FW_DATA_DIR")) {
        const std::string joined = std::string(dir) + "/" + path;
        if (std::ifstream(joined).good()) return joined;
    }
    throw IoError("referenced file not found: " + path);
}

ParticleParams parse_particle(const Json& j) {
    StrictView v(j, "particle");
    ParticleParams p;
    if (v.has("preset")) {
        const std::string name = v.require_string("preset");
        if (name == "unit") {
            // defaults already are natural units with g = 2
        } else if (name == "anomalous-g") {
            p.g = 2.002319;
        } else {
            throw ParseError("particle.preset: unknown preset '" + name + "'");
        }
    }
    p.m = v.get_double("m", p.m);
    p.e = v.get_double("e", p.e);
    p.g = v.get_double("g", p.g);
    p.eta = v.get_double("eta", p.eta);
    p.c = v.get_double("c", p.c);
    p.hbar = v.get_double("hbar", p.hbar);
    v.finish();
    try {
        p.validate();
    } catch (const Error& err) {
        throw ParseError(std::string("particle: ") + err.what());
    }
    return p;
}

const std::set<std::string>& field_preset_names() {
    static const std::set<std::string> names = {
        "zero",       "uniform-E", "uniform-B", "gaussian-well",
        "linear-gradient-B", "sine-E",    "sine-B",    "sine-EB"};
    return names;
}

void validate_field_args(const std::string& preset, const Json& args) {
    StrictView v(args, "fields.args");
    if (preset == "zero") {
    } else if (preset == "uniform-E") {
        v.get_vec3("E", Vec3::Zero());
    } else if (preset == "uniform-B") {
        v.get_vec3("B", Vec3::Zero());
    } else if (preset == "gaussian-well") {
        v.get_double("depth", 0.0);
        if (!(v.get_double("width", 1.0) > 0.0))
            throw ParseError("fields.args.width: must be > 0");
        v.get_double("center", 0.0);
    } else if (preset == "linear-gradient-B") {
        v.get_double("B0", 0.0);
        v.get_double("gradient", 0.0);
    } else if (preset == "sine-E") {
        v.get_double("E0", 0.0);
        if (!(v.get_double("length", 1.0) > 0.0))
            throw ParseError("fields.args.length: must be > 0");
    } else if (preset == "sine-B") {
        v.get_double("B0", 0.0);
        if (!(v.get_double("length", 1.0) > 0.0))
            throw ParseError("fields.args.length: must be > 0");
    } else if (preset == "sine-EB") {
        v.get_double("E0", 0.0);
        v.get_double("B0", 0.0);
        if (!(v.get_double("length", 1.0) > 0.0))
            throw ParseError("fields.args.length: must be > 0");
    }
    v.finish();
}

}  // namespace

double round_fixed(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(fmt12(v).c_str(), nullptr);
}

Json round_fixed_json(const Json& v) {
    if (v.is_number_float()) return round_fixed(v.get<double>());
    if (v.is_object()) {
        Json out = Json::object();
        for (auto it = v.begin(); it != v.end(); ++it)
            out[it.key()] = round_fixed_json(it.value());
        return out;
    }
    if (v.is_array()) {
        Json out = Json::array();
        for (const Json& e : v) out.push_back(round_fixed_json(e));
        return out;
    }
    return v;
}

std::string dump_summary(const Json& summary) {
    return round_fixed_json(summary).dump(2) + "\n";
}

Scenario parse_scenario_json(const Json& doc, const std::string& origin) {
    StrictView root(doc, origin);
    Scenario sc;

    sc.task = root.require_string("task");
    static const std::set<std::string> tasks = {"transform", "simulate", "ehrenfest",
                                               "probe", "check"};
    if (!tasks.count(sc.task))
        throw ParseError(origin + ".task: unknown task '" + sc.task + "'");

    if (root.has("particle")) sc.particle = parse_particle(root.raw("particle"));

    sc.model = root.get_string("model", sc.model);
    if (sc.model != "dirac-pauli" && sc.model != "feshbach-villars")
        throw ParseError(origin + ".model: unknown model '" + sc.model + "'");

    if (root.has("fields")) {
        StrictView f(root.raw("fields"), "fields");
        sc.field_preset = f.get_string("preset", "");
        sc.field_table = f.get_string("table", "");
        sc.table_length_scale = f.get_double("length_scale", 0.0);
        if (f.has("args")) sc.field_args = f.raw("args");
        f.finish();
        if (!sc.field_preset.empty() && !sc.field_table.empty())
            throw ParseError("fields: give either a preset or a table, not both");
        if (!sc.field_preset.empty()) {
            if (!field_preset_names().count(sc.field_preset))
                throw ParseError("fields.preset: unknown preset '" + sc.field_preset +
                                 "'");
            validate_field_args(sc.field_preset,
                                sc.field_args.is_null() ? Json::object() : sc.field_args);
        } else if (!sc.field_args.is_null()) {
            throw ParseError("fields.args: given without a preset");
        }
        if (!sc.field_table.empty())
            sc.field_table = resolve_data_path(sc.field_table);
    }

    if (root.has("discretization")) {
        StrictView d(root.raw("discretization"), "discretization");
        sc.disc_type = d.get_string("type", sc.disc_type);
        if (sc.disc_type == "grid") {
            sc.grid_n = static_cast<int>(d.get_integer("n", sc.grid_n));
            sc.grid_length = d.get_double("length", sc.grid_length);
            sc.transverse_py = d.get_double("py", 0.0);
            sc.transverse_pz = d.get_double("pz", 0.0);
            if (sc.grid_n < 4 || sc.grid_n % 2 != 0)
                throw ParseError("discretization.n: must be even and >= 4");
            if (!(sc.grid_length > 0.0))
                throw ParseError("discretization.length: must be > 0");
        } else if (sc.disc_type == "momentum") {
            if (!d.has("momentum"))
                throw ParseError("discretization: momentum type needs a 'momentum' key");
            const Json& mv = d.raw("momentum");
            sc.momenta.clear();
            if (mv.is_array() && !mv.empty() && mv[0].is_array()) {
                for (size_t i = 0; i < mv.size(); ++i)
                    sc.momenta.push_back(StrictView::parse_vec3(
                        mv[i], "discretization.momentum[" + std::to_string(i) + "]"));
            } else {
                sc.momenta.push_back(
                    StrictView::parse_vec3(mv, "discretization.momentum"));
            }
        } else {
            throw ParseError("discretization.type: unknown type '" + sc.disc_type + "'");
        }
        d.finish();
    }

    if (root.has("controls")) {
        StrictView c(root.raw("controls"), "controls");
        sc.t_end = c.get_double("t_end", sc.t_end);
        sc.rel_tol = c.get_double("rel_tol", sc.rel_tol);
        sc.abs_tol = c.get_double("abs_tol", sc.abs_tol);
        sc.tolerance = c.get_double("tolerance", sc.tolerance);
        sc.dt = c.get_double("dt", sc.dt);
        if (c.has("hbar_list")) sc.hbar_list = c.get_double_list("hbar_list");
        sc.seed = static_cast<unsigned long>(c.get_integer("seed", 0));
        sc.allow_invalid = c.get_bool("allow_invalid", false);
        c.finish();
        if (sc.t_end < 0.0) throw ParseError("controls.t_end: must be >= 0");
        if (!(sc.rel_tol > 0.0) || !(sc.abs_tol > 0.0))
            throw ParseError("controls: tolerances must be > 0");
        if (!(sc.tolerance > 0.0)) throw ParseError("controls.tolerance: must be > 0");
        if (!(sc.dt > 0.0)) throw ParseError("controls.dt: must be > 0");
        for (double h : sc.hbar_list)
            if (!(h > 0.0)) throw ParseError("controls.hbar_list: values must be > 0");
    }

    if (root.has("initial")) {
        StrictView i(root.raw("initial"), "initial");
        sc.initial.r = i.get_vec3("r", Vec3::Zero());
        sc.initial.pi = i.get_vec3("pi", Vec3::Zero());
        sc.initial.P = i.get_vec3("P", Vec3::Zero());
        i.finish();
        sc.has_initial = true;
    }

    if (root.has("packet")) {
        StrictView p(root.raw("packet"), "packet");
        sc.packet_x0 = p.get_double("x0", 0.0);
        sc.packet_p0 = p.get_double("p0", 0.0);
        sc.packet_sigma = p.get_double("sigma", 1.0);
        if (!(sc.packet_sigma > 0.0)) throw ParseError("packet.sigma: must be > 0");
        if (p.has("spinor")) {
            const Json& sv = p.raw("spinor");
            if (!sv.is_array()) throw ParseError("packet.spinor: expected an array");
            for (const Json& e : sv) {
                if (e.is_number()) {
                    sc.packet_spinor.emplace_back(e.get<double>(), 0.0);
                } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
                           e[1].is_number()) {
                    sc.packet_spinor.emplace_back(e[0].get<double>(),
                                                  e[1].get<double>());
                } else {
                    throw ParseError(
                        "packet.spinor: entries must be numbers or [re, im] pairs");
                }
            }
        }
        p.finish();
        sc.has_packet = true;
    }

    if (root.has("output")) {
        StrictView o(root.raw("output"), "output");
        sc.summary_path = o.get_string("summary", "");
        sc.trajectory_path = o.get_string("trajectory", "");
        o.finish();
    }

    root.finish();
    return sc;
}

Scenario parse_scenario_file(const std::string& path_in) {
    const std::string path = resolve_data_path(path_in);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Convert the byte offset into a line number for the diagnostic.
        size_t line = 1;
        for (size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
            if (text[i] == '\n') ++line;
        throw ParseError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    return parse_scenario_json(doc, path);
}

FieldConfiguration build_fields(const Scenario& sc) {
    if (!sc.field_table.empty())
        return FieldConfiguration::from_table_csv(sc.field_table, sc.table_length_scale);
    const std::string& p = sc.field_preset;
    if (p.empty() || p == "zero") return FieldConfiguration::zero();
    const Json args = sc.field_args.is_null() ? Json::object() : sc.field_args;
    StrictView v(args, "fields.args");
    FieldConfiguration f;
    if (p == "uniform-E") {
        f = FieldConfiguration::uniform_E(v.get_vec3("E", Vec3::Zero()));
    } else if (p == "uniform-B") {
        f = FieldConfiguration::uniform_B(v.get_vec3("B", Vec3::Zero()));
    } else if (p == "gaussian-well") {
        f = FieldConfiguration::gaussian_well(v.get_double("depth", 0.0),
                                              v.get_double("width", 1.0),
                                              v.get_double("center", 0.0));
    } else if (p == "linear-gradient-B") {
        f = FieldConfiguration::linear_gradient_B(v.get_double("B0", 0.0),
                                                  v.get_double("gradient", 0.0));
    } else if (p == "sine-E") {
        f = FieldConfiguration::sine_E(v.get_double("E0", 0.0),
                                       v.get_double("length", sc.grid_length));
    } else if (p == "sine-B") {
        f = FieldConfiguration::sine_B(v.get_double("B0", 0.0),
                                       v.get_double("length", sc.grid_length));
    } else if (p == "sine-EB") {
        f = FieldConfiguration::sine_EB(v.get_double("E0", 0.0), v.get_double("B0", 0.0),
                                        v.get_double("length", sc.grid_length));
    } else {
        throw ParseError("fields.preset: unknown preset '" + p + "'");
    }
    return f;
}

namespace {

// ------------------------------------------------------------- task helpers

HamiltonianTriple build_triple(const Scenario& sc, const FieldConfiguration& fields,
                               const ParticleParams& params, const Scheme& scheme) {
    if (sc.model == "feshbach-villars")
        return build_feshbach_villars(fields, params, scheme);
    return build_dirac_pauli(fields, params, scheme);
}

std::vector<Scheme> make_schemes(const Scenario& sc) {
    std::vector<Scheme> out;
    if (sc.disc_type == "grid") {
        out.emplace_back(SpectralGrid(sc.grid_n, sc.grid_length, sc.transverse_py,
                                      sc.transverse_pz));
    } else {
        for (const Vec3& p : sc.momenta) out.emplace_back(MomentumBlock{p});
    }
    return out;
}

std::vector<Vec3> consistency_samples(const Scenario& sc, const FieldConfiguration& f,
                                      std::mt19937_64& rng) {
    double lo = 0.0, hi = sc.disc_type == "grid" ? sc.grid_length : 5.0;
    lo = std::max(lo, f.domain_lo);
    hi = std::min(hi, f.domain_hi);
    if (!(hi > lo)) {
        lo = f.domain_lo;
        hi = f.domain_hi;
    }
    const double margin = 1e-3 * (hi - lo);
    lo += margin;
    hi -= margin;
    std::vector<Vec3> samples;
    const int n_axis = 25;
    for (int i = 0; i < n_axis; ++i)
        samples.emplace_back(lo + (hi - lo) * i / (n_axis - 1), 0.0, 0.0);
    if (std::isinf(f.domain_lo)) {
        // Analytic configuration: also probe off-axis points.
        std::uniform_real_distribution<double> ux(lo, hi), uyz(-2.0, 2.0);
        for (int i = 0; i < 10; ++i)
            samples.emplace_back(ux(rng), uyz(rng), uyz(rng));
    }
    return samples;
}

Json consistency_json(const ConsistencyReport& rep) {
    return Json{{"ok", rep.ok},
                {"max_E_deviation", rep.max_E_deviation},
                {"max_H_deviation", rep.max_H_deviation},
                {"worst_E_location", vec3_json(rep.worst_E_location)},
                {"worst_H_location", vec3_json(rep.worst_H_location)}};
}

Json state_json(const PhaseSpinState& s) {
    return Json{{"r", vec3_json(s.r)}, {"pi", vec3_json(s.pi)}, {"P", vec3_json(s.P)}};
}

// ------------------------------------------------------------------ transform

Json transform_block(const Scenario& sc, const FieldConfiguration& fields,
                     const Scheme& scheme) {
    const HamiltonianTriple triple = build_triple(sc, fields, sc.particle, scheme);
    const StepResult step = general_fw_step(triple);
    const FWResult fw = final_fw(step, triple);
    const BlockOperator full{triple.full(), triple.M.spinor_rank, triple.M.basis_tag};

    Json out;
    out["scheme"] = scheme_tag(scheme);
    out["dim"] = full.dim();
    out["hermiticity"] = is_hermitian(full) ? "hermitian" : "pseudo-hermitian";
    out["residual_odd_norm"] = fw.residual_odd_norm;
    out["unitarity_defect"] = fw.unitarity_defect;
    out["reduced_path_used"] = step.reduced_path_used;
    out["reduction_gap"] = step.reduction_gap;

    try {
        const FWResult ex = exact_fw(triple);
        out["exact_path"] = Json{{"applicable", true},
                                 {"vs_general_rel", rel_norm(ex.H_fw - fw.H_fw, fw.H_fw)}};
    } catch (const NotExactCase&) {
        out["exact_path"] = Json{{"applicable", false}};
    }

    if (full.dim() <= 2048) {
        const EriksenResult er = eriksen_fw(full);
        out["sign_function_oracle"] =
            Json{{"offdiag_norm", er.offdiag_norm},
                 {"vs_general_rel", rel_norm(er.H_diag - fw.H_fw, er.H_diag)}};
    }
    return out;
}

RunOutcome run_transform(const Scenario& sc) {
    const FieldConfiguration fields = build_fields(sc);
    Json blocks = Json::array();
    double worst_residual = 0.0, worst_unitarity = 0.0;
    for (const Scheme& scheme : make_schemes(sc)) {
        Json b = transform_block(sc, fields, scheme);
        worst_residual = std::max(worst_residual, b["residual_odd_norm"].get<double>());
        worst_unitarity = std::max(worst_unitarity, b["unitarity_defect"].get<double>());
        blocks.push_back(std::move(b));
    }
    RunOutcome out;
    out.summary = Json{{"task", "transform"},
                       {"model", sc.model},
                       {"field", fields.description},
                       {"residual_odd_norm", worst_residual},
                       {"unitarity_defect", worst_unitarity},
                       {"blocks", std::move(blocks)}};
    return out;
}

// ------------------------------------------------------------------- simulate

RunOutcome run_simulate(const Scenario& sc) {
    if (!sc.has_initial)
        throw ParseError("simulate: scenario needs an 'initial' section");
    if (!(sc.t_end > 0.0)) throw ParseError("simulate: controls.t_end must be > 0");
    const FieldConfiguration fields = build_fields(sc);

    IntegratorControls controls;
    controls.rel_tol = sc.rel_tol;
    controls.abs_tol = sc.abs_tol;
    controls.spin = sc.model == "dirac-pauli";
    controls.allow_invalid = sc.allow_invalid;

    const Trajectory traj = integrate(sc.initial, fields, sc.particle, sc.t_end, controls);

    Json fits = Json::object();
    try {
        fits["pi_xy"] = fit_rotation_frequency(traj, 'p', 0, 1);
    } catch (const Error&) {
    }
    if (controls.spin) {
        try {
            fits["P_xy"] = fit_rotation_frequency(traj, 'P', 0, 1);
        } catch (const Error&) {
        }
    }
    if (fits.contains("pi_xy") && fits.contains("P_xy")) {
        const double wp = std::abs(fits["P_xy"].get<double>());
        const double wc = std::abs(fits["pi_xy"].get<double>());
        if (wc > 0.0) fits["anomalous_ratio"] = (wp - wc) / wc;
    }

    if (!sc.trajectory_path.empty()) {
        std::ostringstream csv;
        csv << "t,x,y,z,pi_x,pi_y,pi_z,P_x,P_y,P_z,energy\n";
        for (const TrajectorySample& s : traj.samples) {
            csv << fmt12(s.t);
            for (int i = 0; i < 3; ++i) csv << ',' << fmt12(s.state.r[i]);
            for (int i = 0; i < 3; ++i) csv << ',' << fmt12(s.state.pi[i]);
            for (int i = 0; i < 3; ++i) csv << ',' << fmt12(s.state.P[i]);
            csv << ',' << fmt12(s.energy) << '\n';
        }
        write_text_file(sc.trajectory_path, csv.str());
    }

    RunOutcome out;
    out.summary = Json{
        {"task", "simulate"},
        {"model", sc.model},
        {"field", fields.description},
        {"t_end", sc.t_end},
        {"initial", state_json(sc.initial)},
        {"final", state_json(traj.samples.back().state)},
        {"samples", traj.samples.size()},
        {"accepted_steps", traj.accepted},
        {"rejected_steps", traj.rejected},
        {"energy_drift_rel", traj.max_energy_drift},
        {"polarization_drift", traj.max_polarization_drift},
        {"validity",
         Json{{"worst_lambda_over_l", traj.worst_lambda_over_l},
              {"violated", traj.validity_violated}}},
        {"frequency_fits", std::move(fits)}};
    return out;
}

// ------------------------------------------------------------------ ehrenfest

RunOutcome run_ehrenfest(const Scenario& sc) {
    if (sc.disc_type != "grid")
        throw ParseError("ehrenfest: needs a grid discretization");
    if (!sc.has_packet) throw ParseError("ehrenfest: scenario needs a 'packet' section");
    if (!(sc.t_end > 0.0)) throw ParseError("ehrenfest: controls.t_end must be > 0");
    const FieldConfiguration fields = build_fields(sc);
    const SpectralGrid grid(sc.grid_n, sc.grid_length, sc.transverse_py,
                            sc.transverse_pz);

    // Positive-energy block eps(pi) + e Phi over the grid; the orbital
    // correspondence check is spin-independent.
    const KineticStructure ks =
        kinetic_structure(fields, sc.particle, Scheme(grid));
    Matrix k2 = Matrix::Zero(grid.n(), grid.n());
    for (int i = 0; i < 3; ++i) k2 += ks.pi[i] * ks.pi[i];
    k2 = 0.5 * (k2 + k2.adjoint().eval());
    const double mc2 = sc.particle.mc2(), c = sc.particle.c;
    Matrix h_pos = hermitian_function(
        k2, [mc2, c](double k) { return std::sqrt(mc2 * mc2 + c * c * k); });
    h_pos += sc.particle.e * Matrix(ks.Phi.cast<Complex>().asDiagonal());
    const BlockOperator h_block{std::move(h_pos), 1, grid.tag()};

    const CVector psi0 =
        grid.packet(sc.packet_x0, sc.packet_p0, sc.packet_sigma, sc.particle.hbar);
    const EhrenfestRecord rec =
        ehrenfest_check(psi0, h_block, grid, fields, sc.particle, sc.t_end, sc.dt);

    RunOutcome out;
    out.summary = Json{
        {"task", "ehrenfest"},
        {"model", sc.model},
        {"field", fields.description},
        {"t", rec.t},
        {"x_mean", rec.x_mean},
        {"pi_mean", rec.pi_mean},
        {"dpi_dt_quantum", rec.dpi_dt_quantum},
        {"force_classical", rec.force_classical},
        {"rel_deviation", rec.rel_deviation},
        {"validity",
         Json{{"lambda_over_l", rec.validity.lambda_over_l},
              {"lambda", rec.validity.lambda},
              {"ok", rec.validity.ok}}},
        {"flagged", rec.flagged}};
    return out;
}

// ---------------------------------------------------------------------- probe

RunOutcome run_probe(const Scenario& sc, int jobs) {
    if (sc.hbar_list.size() < 2)
        throw ParseError("probe: controls.hbar_list needs at least two values");
    const FieldConfiguration fields = build_fields(sc);
    const std::vector<Scheme> schemes = make_schemes(sc);
    const Scheme& scheme = schemes.front();
    const int rank = sc.model == "feshbach-villars" ? 2 : 4;
    const int points = scheme_points(scheme);
    const int dim = rank * points;

    // Build the per-hbar inputs (Hamiltonian triple, probe packets, oracle)
    // up front; --jobs fans this expensive part out over worker threads.
    std::vector<ProbeInputs> cache(sc.hbar_list.size());
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= sc.hbar_list.size()) return;
            try {
                const ParticleParams params = sc.particle.with_hbar(sc.hbar_list[i]);
                ProbeInputs in;
                in.triple = build_triple(sc, fields, params, scheme);

                std::vector<CVector> spatial;
                if (std::holds_alternative<SpectralGrid>(scheme)) {
                    const SpectralGrid& g = std::get<SpectralGrid>(scheme);
                    if (sc.has_packet) {
                        spatial.push_back(g.packet(sc.packet_x0, sc.packet_p0,
                                                   sc.packet_sigma, params.hbar));
                    } else {
                        const double l = g.length();
                        const double x0[4] = {0.50 * l, 0.45 * l, 0.55 * l, 0.50 * l};
                        const double p0[4] = {0.0, 0.2, -0.25, 0.15};
                        for (int k = 0; k < 4; ++k)
                            spatial.push_back(g.packet(x0[k], p0[k], 1.0, params.hbar));
                    }
                } else {
                    spatial.push_back(CVector::Ones(1));
                }
                // Embed in the positive (upper) spinor components.
                for (const CVector& q : spatial) {
                    for (int comp = 0; comp < rank / 2; ++comp) {
                        CVector full = CVector::Zero(dim);
                        full.segment(comp * points, points) = q;
                        in.probes.push_back(std::move(full));
                    }
                }
                if (dim <= 2048) {
                    const BlockOperator full_h{in.triple.full(), rank,
                                               in.triple.M.basis_tag};
                    in.oracle_h = eriksen_fw(full_h).H_diag;
                }
                cache[i] = std::move(in);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    const int n_workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(sc.hbar_list.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    auto build = [&](double hb) -> ProbeInputs {
        for (size_t i = 0; i < sc.hbar_list.size(); ++i)
            if (sc.hbar_list[i] == hb) return cache[i];
        throw Error("probe: internal hbar lookup failure");
    };
    const ProbeResult res = hbar_scaling_probe(build, sc.hbar_list);

    auto series_json = [](const ProbeSeries& s) {
        Json out;
        out["deviations"] = s.deviations;
        out["slope"] = s.slope;  // NaN serializes as null for an exact case
        out["below_floor"] = s.below_floor;
        return out;
    };
    RunOutcome out;
    out.summary = Json{{"task", "probe"},
                       {"model", sc.model},
                       {"field", fields.description},
                       {"scheme", scheme_tag(scheme)},
                       {"hbar", res.hbar_values},
                       {"odd_residual", series_json(res.odd_step)},
                       {"folded_odd_residual", series_json(res.odd_final)},
                       {"vs_oracle", series_json(res.vs_oracle)}};
    return out;
}

// ---------------------------------------------------------------------- check

RunOutcome run_check(const Scenario& sc) {
    const FieldConfiguration fields = build_fields(sc);
    std::mt19937_64 rng(sc.seed);
    const ConsistencyReport rep =
        check_field_consistency(fields, consistency_samples(sc, fields, rng), 1e-6, true);

    const Scheme scheme = make_schemes(sc).front();
    const ParticleParams& params = sc.particle;
    const HamiltonianTriple triple = build_triple(sc, fields, params, scheme);
    const int rank = triple.M.spinor_rank;
    const BlockOperator full{triple.full(), rank, triple.M.basis_tag};

    Json checks = Json::array();
    bool all_ok = true;
    auto push = [&](const std::string& name, double deviation) {
        const bool ok = deviation <= sc.tolerance;
        all_ok = all_ok && ok;
        checks.push_back(
            Json{{"name", name}, {"deviation", deviation}, {"passed", ok}});
    };

    push("mass_term_even", rel_norm(grade_split(triple.M).odd.matrix, triple.M.matrix));
    const Matrix e_scale = triple.E.matrix.norm() > 0.0 ? triple.E.matrix : full.matrix;
    push("static_term_even", rel_norm(grade_split(triple.E).odd.matrix, e_scale));
    const Matrix o_scale = triple.O.matrix.norm() > 0.0 ? triple.O.matrix : full.matrix;
    push("odd_term_odd", rel_norm(grade_split(triple.O).even.matrix, o_scale));

    const bool want_hermitian = sc.model == "dirac-pauli";
    const double herm_dev =
        want_hermitian
            ? rel_norm(full.matrix - full.matrix.adjoint(), full.matrix)
            : rel_norm(full.matrix - pseudo_adjoint(full).matrix, full.matrix);
    push(want_hermitian ? "hermitian" : "pseudo_hermitian", herm_dev);

    if (sc.model == "feshbach-villars") {
        // (M + beta O)(M - beta O) should close onto m^2 c^4 + c^2 pi^2.
        const KineticStructure ks = kinetic_structure(fields, params, scheme);
        Matrix k2 = Matrix::Zero(ks.points, ks.points);
        for (int i = 0; i < 3; ++i) k2 += ks.pi[i] * ks.pi[i];
        Matrix target = Matrix::Zero(full.dim(), full.dim());
        const double m2c4 = params.mc2() * params.mc2();
        for (int b = 0; b < rank; ++b)
            target.block(b * ks.points, b * ks.points, ks.points, ks.points) =
                params.c * params.c * k2 +
                m2c4 * Matrix::Identity(ks.points, ks.points);
        const Matrix closed =
            triple.M.matrix * triple.M.matrix + triple.O.matrix * triple.O.matrix;
        push("energy_square_identity", rel_norm(closed - target, target));
    }

    {
        // Phi -> Phi + V0 must shift the Hamiltonian by exactly e V0.
        const double v0 = 0.5;
        FieldConfiguration shifted = fields;
        auto base_phi = fields.Phi;
        shifted.Phi = [base_phi, v0](const Vec3& r) { return base_phi(r) + v0; };
        const HamiltonianTriple t2 = build_triple(sc, shifted, params, scheme);
        const Matrix expected =
            full.matrix +
            params.e * v0 * Matrix::Identity(full.dim(), full.dim());
        push("gauge_shift", rel_norm(t2.full() - expected, expected));
    }

    RunOutcome out;
    out.summary = Json{{"task", "check"},
                       {"model", sc.model},
                       {"field", fields.description},
                       {"scheme", scheme_tag(scheme)},
                       {"field_consistency", consistency_json(rep)},
                       {"checks", std::move(checks)},
                       {"ok", all_ok}};
    if (!all_ok) out.exit_code = 3;
    return out;
}

}  // namespace

RunOutcome run_scenario(const Scenario& sc, int jobs) {
    sc.particle.validate();
    if (sc.task == "transform") return run_transform(sc);
    if (sc.task == "simulate") return run_simulate(sc);
    if (sc.task == "ehrenfest") return run_ehrenfest(sc);
    if (sc.task == "probe") return run_probe(sc, jobs);
    if (sc.task == "check") return run_check(sc);
    throw ParseError("unknown task '" + sc.task + "'");
}

RunOutcome validate_scenario(const std::string& path) {
    Scenario sc;
    if (const auto preset = scenario_preset(path)) {
        sc = parse_scenario_json(*preset, path);
    } else {
        sc = parse_scenario_file(path);
    }
    const FieldConfiguration fields = build_fields(sc);
    std::mt19937_64 rng(sc.seed);
    const ConsistencyReport rep =
        check_field_consistency(fields, consistency_samples(sc, fields, rng), 1e-6, true);
    RunOutcome out;
    out.summary = Json{{"valid", true},
                       {"task", sc.task},
                       {"model", sc.model},
                       {"field", fields.description},
                       {"length_scale", fields.length_scale},
                       {"field_consistency", consistency_json(rep)}};
    return out;
}

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = {
        {"zero", "field", "free space, all fields vanish"},
        {"uniform-E", "field", "uniform electric field E, Phi = -E.r"},
        {"uniform-B", "field", "uniform magnetic field B, A = B x r / 2"},
        {"gaussian-well", "field", "attractive Gaussian electrostatic well"},
        {"linear-gradient-B", "field",
         "divergence- and curl-free magnetic field with a linear gradient"},
        {"sine-E", "field", "single-Fourier-mode electric field along x"},
        {"sine-B", "field", "single-Fourier-mode magnetic field along z"},
        {"sine-EB", "field", "superposed single-mode electric and magnetic fields"},
        {"unit", "particle", "natural units: m = e = c = hbar = 1, g = 2"},
        {"anomalous-g", "particle", "natural units with g = 2.002319"},
        {"free-dirac", "scenario",
         "transform of the free spin-1/2 Hamiltonian over momentum blocks"},
        {"dirac-pauli-uniform-B", "scenario",
         "transform of the spin-1/2 Hamiltonian with anomalous moment in a uniform "
         "magnetic field"},
        {"feshbach-villars-gaussian-well", "scenario",
         "hbar-scaling probe of the spinless transform in a Gaussian well"},
        {"g-2", "scenario",
         "spin and momentum rotation frequencies of a slow particle in a uniform "
         "magnetic field; reports the anomalous ratio (g-2)/2"},
        {"rest-precession", "scenario",
         "polarization precession at rest in a uniform magnetic field"},
        {"scalar-cyclotron", "scenario",
         "relativistic cyclotron orbit of a spinless particle"},
        {"ehrenfest-gaussian-well", "scenario",
         "wavepacket force correspondence check in a Gaussian well"},
    };
    return catalog;
}

std::optional<Json> scenario_preset(const std::string& name) {
    if (name == "free-dirac")
        return Json{{"task", "transform"},
                    {"model", "dirac-pauli"},
                    {"particle", Json{{"preset", "unit"}}},
                    {"fields", Json{{"preset", "zero"}}},
                    {"discretization",
                     Json{{"type", "momentum"},
                          {"momentum", Json::array({Json::array({0.0, 0.0, 0.0}),
                                                    Json::array({0.3, 0.0, 0.0}),
                                                    Json::array({0.0, 0.5, 0.0}),
                                                    Json::array({1.0, 1.0, 1.0})})}}}};
    if (name == "dirac-pauli-uniform-B")
        return Json{{"task", "transform"},
                    {"model", "dirac-pauli"},
                    {"particle", Json{{"preset", "anomalous-g"}}},
                    {"fields",
                     Json{{"preset", "uniform-B"},
                          {"args", Json{{"B", Json::array({0.0, 0.0, 0.15})}}}}},
                    {"discretization",
                     Json{{"type", "momentum"},
                          {"momentum", Json::array({Json::array({0.25, 0.1, 0.05}),
                                                    Json::array({0.6, 0.0, 0.0})})}}}};
    if (name == "feshbach-villars-gaussian-well")
        return Json{
            {"task", "probe"},
            {"model", "feshbach-villars"},
            {"particle", Json{{"preset", "unit"}}},
            {"fields",
             Json{{"preset", "gaussian-well"},
                  {"args", Json{{"depth", 0.5}, {"width", 2.0}, {"center", 10.0}}}}},
            {"discretization", Json{{"type", "grid"}, {"n", 128}, {"length", 20.0}}},
            {"controls", Json{{"hbar_list", Json::array({0.02, 0.04, 0.08, 0.16})}}}};
    if (name == "g-2")
        return Json{
            {"task", "simulate"},
            {"model", "dirac-pauli"},
            {"particle", Json{{"preset", "anomalous-g"}}},
            {"fields",
             Json{{"preset", "uniform-B"}, {"args", Json{{"B", Json::array({0.0, 0.0, 1.0})}}}}},
            {"controls",
             Json{{"t_end", 62.83185307179586}, {"rel_tol", 1e-12}, {"abs_tol", 1e-18}}},
            {"initial",
             Json{{"r", Json::array({0.0, 0.0, 0.0})},
                  {"pi", Json::array({0.0003, 0.0, 0.0})},
                  {"P", Json::array({1.0, 0.0, 0.0})}}}};
    if (name == "rest-precession")
        return Json{
            {"task", "simulate"},
            {"model", "dirac-pauli"},
            {"particle", Json{{"preset", "unit"}}},
            {"fields",
             Json{{"preset", "uniform-B"}, {"args", Json{{"B", Json::array({0.0, 0.0, 1.0})}}}}},
            {"controls",
             Json{{"t_end", 628.3185307179587}, {"rel_tol", 1e-12}, {"abs_tol", 1e-14}}},
            {"initial",
             Json{{"r", Json::array({0.0, 0.0, 0.0})},
                  {"pi", Json::array({0.0, 0.0, 0.0})},
                  {"P", Json::array({1.0, 0.0, 0.0})}}}};
    if (name == "scalar-cyclotron")
        return Json{
            {"task", "simulate"},
            {"model", "feshbach-villars"},
            {"particle", Json{{"preset", "unit"}}},
            {"fields",
             Json{{"preset", "uniform-B"}, {"args", Json{{"B", Json::array({0.0, 0.0, 1.0})}}}}},
            {"controls",
             Json{{"t_end", 88.85765876316732}, {"rel_tol", 1e-12}, {"abs_tol", 1e-14}}},
            {"initial",
             Json{{"r", Json::array({0.0, 0.0, 0.0})},
                  {"pi", Json::array({1.0, 0.0, 0.0})},
                  {"P", Json::array({0.0, 0.0, 0.0})}}}};
    if (name == "ehrenfest-gaussian-well")
        return Json{
            {"task", "ehrenfest"},
            {"model", "feshbach-villars"},
            {"particle", Json{{"hbar", 0.02}}},
            {"fields",
             Json{{"preset", "gaussian-well"},
                  {"args", Json{{"depth", 0.35}, {"width", 12.7}, {"center", 41.0}}}}},
            {"discretization", Json{{"type", "grid"}, {"n", 1536}, {"length", 82.0}}},
            {"controls", Json{{"t_end", 0.4}, {"dt", 0.4}}},
            {"packet", Json{{"x0", 23.22}, {"p0", 1.0}, {"sigma", 1.3}}}};
    return std::nullopt;
}

}  // namespace fwt
