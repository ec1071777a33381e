#include "fwt/semiclassical.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fwt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 sum_terms(const std::map<std::string, Vec3>& terms, const char* prefix) {
    Vec3 out = Vec3::Zero();
    for (const auto& [name, v] : terms)
        if (name.rfind(prefix, 0) == 0) out += v;
    return out;
}

}  // namespace

double PhaseSpinState::eps_prime(const ParticleParams& p) const {
    return std::sqrt(p.mc2() * p.mc2() + p.c * p.c * pi.squaredNorm());
}

Vec3 SpinHalfRhs::lorentz_part() const { return sum_terms(force_terms, "lorentz"); }
Vec3 SpinHalfRhs::gradient_part() const { return sum_terms(force_terms, "gradient"); }

SpinHalfRhs rhs_spin_half(const PhaseSpinState& s, const FieldConfiguration& fields,
                          const ParticleParams& params) {
    params.validate();
    const double eps = s.eps_prime(params);
    const double mc2 = params.mc2(), c = params.c;
    const double mu0 = params.mu0(), mup = params.mu_prime(), d = params.d_edm();
    const double denom = eps * (eps + mc2);

    const Vec3 e = fields.E(s.r), h = fields.H(s.r);
    const Eigen::Matrix3d de = fields.dE(s.r), dh = fields.dH(s.r);
    const Vec3& pi = s.pi;
    const Vec3& pol = s.P;

    // grad (P . H) and grad (H . pi) with pi, P frozen.
    const Vec3 grad_ph = dh.transpose() * pol;
    const Vec3 grad_hpi = dh.transpose() * pi;
    // grad (P . (pi x E)): column j of dE enters through pi x dE_j.
    Vec3 grad_ppe;
    for (int j = 0; j < 3; ++j) grad_ppe[j] = pol.dot(pi.cross(Vec3(de.col(j))));

    SpinHalfRhs r;
    r.force_terms["lorentz_E"] = params.e * e;
    r.force_terms["lorentz_B"] = (params.e * c / eps) * pi.cross(h);
    r.force_terms["gradient_moment_anomalous"] = mup * grad_ph;
    r.force_terms["gradient_moment_dirac"] = mu0 * (mc2 / eps) * grad_ph;
    r.force_terms["gradient_spin_orbit_anomalous"] = -(mup * c / eps) * grad_ppe;
    r.force_terms["gradient_spin_orbit_dirac"] = -(mu0 * params.m * c * c * c / denom) * grad_ppe;
    r.force_terms["gradient_longitudinal"] =
        -(mup * c * c / denom) * pol.dot(pi) * grad_hpi;
    for (const auto& [name, v] : r.force_terms) r.dpi += v;

    // Precession generator over hbar: at rest in a uniform magnetic field the
    // rate is g mu0 |H| / hbar.
    const double inv_hbar = 1.0 / params.hbar;
    r.spin_terms["precession_anomalous"] = inv_hbar * 2.0 * mup * pol.cross(h);
    r.spin_terms["precession_dirac"] = inv_hbar * (2.0 * mu0 * mc2 / eps) * pol.cross(h);
    r.spin_terms["spin_orbit_anomalous"] =
        -inv_hbar * (2.0 * mup * c / eps) * pol.cross(pi.cross(e));
    r.spin_terms["spin_orbit_dirac"] =
        -inv_hbar * (2.0 * mu0 * params.m * c * c * c / denom) * pol.cross(pi.cross(e));
    r.spin_terms["longitudinal_moment"] =
        -inv_hbar * (2.0 * mup * c * c / denom) * pi.dot(h) * pol.cross(pi);
    r.spin_terms["edm_precession"] = inv_hbar * 2.0 * d * pol.cross(e);
    r.spin_terms["edm_longitudinal"] =
        -inv_hbar * (2.0 * d * c * c / denom) * pi.dot(e) * pol.cross(pi);
    r.spin_terms["edm_spin_orbit"] =
        inv_hbar * (2.0 * d * c / eps) * pol.cross(pi.cross(h));
    for (const auto& [name, v] : r.spin_terms) r.dP += v;
    return r;
}

Vec3 rhs_scalar(const PhaseSpinState& s, const FieldConfiguration& fields,
                const ParticleParams& params) {
    const double eps = s.eps_prime(params);
    return params.e * fields.E(s.r) +
           (params.e * params.c / eps) * s.pi.cross(fields.H(s.r));
}

ValidityReport validity_report(const PhaseSpinState& s, const FieldConfiguration& fields,
                               const ParticleParams& params, double threshold) {
    ValidityReport rep;
    const double p = s.pi.norm();
    const double l = fields.length_scale;
    rep.lambda = p > 0.0 ? 2.0 * M_PI * params.hbar / p : kInf;
    if (std::isinf(l)) {
        // Uniform configuration: no gradients, the expansion is exact in the
        // field variation and the ratio is zero whatever the wavelength.
        rep.lambda_over_l = 0.0;
        rep.pl_over_hbar = kInf;
    } else {
        rep.lambda_over_l = rep.lambda / l;
        rep.pl_over_hbar = p * l / params.hbar;
    }
    rep.ok = rep.lambda_over_l <= threshold;
    return rep;
}

namespace {

struct RawState {
    std::array<double, 9> y{};  // r, pi, P

    static RawState from(const PhaseSpinState& s) {
        RawState r;
        for (int i = 0; i < 3; ++i) {
            r.y[i] = s.r[i];
            r.y[3 + i] = s.pi[i];
            r.y[6 + i] = s.P[i];
        }
        return r;
    }
    PhaseSpinState to() const {
        PhaseSpinState s;
        for (int i = 0; i < 3; ++i) {
            s.r[i] = y[i];
            s.pi[i] = y[3 + i];
            s.P[i] = y[6 + i];
        }
        return s;
    }
};

RawState derivative(const RawState& rs, const FieldConfiguration& fields,
                    const ParticleParams& params, bool spin) {
    const PhaseSpinState s = rs.to();
    const double eps = s.eps_prime(params);
    const Vec3 dr = (params.c * params.c / eps) * s.pi;
    Vec3 dpi, dp = Vec3::Zero();
    if (spin) {
        const SpinHalfRhs rhs = rhs_spin_half(s, fields, params);
        dpi = rhs.dpi;
        dp = rhs.dP;
    } else {
        dpi = rhs_scalar(s, fields, params);
    }
    RawState out;
    for (int i = 0; i < 3; ++i) {
        out.y[i] = dr[i];
        out.y[3 + i] = dpi[i];
        out.y[6 + i] = dp[i];
    }
    return out;
}

}  // namespace

Trajectory integrate(const PhaseSpinState& initial, const FieldConfiguration& fields,
                     const ParticleParams& params, double t_end,
                     const IntegratorControls& controls) {
    params.validate();
    if (!(t_end > 0.0)) throw Error("integrate: t_end must be > 0");

    const ValidityReport gate =
        validity_report(initial, fields, params, controls.validity_threshold);
    if (!gate.ok && !controls.allow_invalid)
        throw ValidityError(
            "semiclassical validity gate failed: wavelength/field-scale ratio " +
            std::to_string(gate.lambda_over_l) + " exceeds threshold " +
            std::to_string(controls.validity_threshold) +
            " (override explicitly to proceed)");

    // Dormand-Prince 5(4) tableau.
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b5[7] = {35.0 / 384,      0.0,          500.0 / 1113, 125.0 / 192,
                                 -2187.0 / 6784,  11.0 / 84,    0.0};
    static const double b4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695,
                                 393.0 / 640,     -92097.0 / 339200,
                                 187.0 / 2100,    1.0 / 40};

    auto rhs = [&](const RawState& s) {
        return derivative(s, fields, params, controls.spin);
    };

    Trajectory traj;
    RawState y = RawState::from(initial);
    double t = 0.0;

    const double e_phi0 = params.e * fields.Phi(initial.r);
    const double energy0 = initial.eps_prime(params) + e_phi0;
    auto record = [&](double tt, const RawState& s) {
        TrajectorySample sample;
        sample.t = tt;
        sample.state = s.to();
        sample.eps_prime = sample.state.eps_prime(params);
        sample.energy = sample.eps_prime + params.e * fields.Phi(sample.state.r);
        sample.polarization_norm = sample.state.P.norm();
        traj.samples.push_back(sample);
        if (controls.spin)
            traj.max_polarization_drift = std::max(
                traj.max_polarization_drift, std::abs(sample.polarization_norm - 1.0));
        if (energy0 != 0.0)
            traj.max_energy_drift =
                std::max(traj.max_energy_drift,
                         std::abs(sample.energy - energy0) / std::abs(energy0));
        const ValidityReport v = validity_report(sample.state, fields, params,
                                                 controls.validity_threshold);
        traj.worst_lambda_over_l = std::max(traj.worst_lambda_over_l, v.lambda_over_l);
        if (!v.ok) traj.validity_violated = true;
    };
    record(0.0, y);

    RawState k[7];
    k[0] = rhs(y);

    double h;
    if (controls.fixed_step > 0.0) {
        h = controls.fixed_step;
    } else if (controls.initial_step > 0.0) {
        h = controls.initial_step;
    } else {
        double ynorm = 0.0, fnorm = 0.0;
        for (int i = 0; i < 9; ++i) {
            ynorm = std::max(ynorm, std::abs(y.y[i]));
            fnorm = std::max(fnorm, std::abs(k[0].y[i]));
        }
        h = fnorm > 1e-12 ? 0.01 * (ynorm + 1.0) / fnorm : 1e-3 * t_end;
        h = std::min(h, 1e-2 * t_end);
    }

    const bool adaptive = !(controls.fixed_step > 0.0);
    const double h_min = 1e-14 * t_end;
    double last_record = 0.0;

    for (long step = 0; t < t_end; ++step) {
        if (step >= controls.max_steps)
            throw StiffnessError("integrate: step budget exhausted at t = " +
                                 std::to_string(t));
        h = std::min(h, t_end - t);

        for (int stage = 1; stage < 7; ++stage) {
            RawState ys = y;
            for (int i = 0; i < 9; ++i) {
                double acc = 0.0;
                for (int j = 0; j < stage; ++j) acc += a[stage][j] * k[j].y[i];
                ys.y[i] += h * acc;
            }
            k[stage] = rhs(ys);
        }

        RawState y5 = y;
        double err = 0.0;
        for (int i = 0; i < 9; ++i) {
            double acc5 = 0.0, acc4 = 0.0;
            for (int j = 0; j < 7; ++j) {
                acc5 += b5[j] * k[j].y[i];
                acc4 += b4[j] * k[j].y[i];
            }
            y5.y[i] += h * acc5;
            const double e_i = h * (acc5 - acc4);
            const double sc = controls.abs_tol +
                              controls.rel_tol *
                                  std::max(std::abs(y.y[i]), std::abs(y5.y[i]));
            err += (e_i / sc) * (e_i / sc);
        }
        err = std::sqrt(err / 9.0);

        if (!adaptive || err <= 1.0) {
            t += h;
            y = y5;
            k[0] = k[6];  // first-same-as-last
            ++traj.accepted;
            if (controls.project_polarization && controls.spin) {
                double pn = 0.0;
                for (int i = 6; i < 9; ++i) pn += y.y[i] * y.y[i];
                pn = std::sqrt(pn);
                if (pn > 0.0)
                    for (int i = 6; i < 9; ++i) y.y[i] /= pn;
            }
            if (controls.record_interval <= 0.0 ||
                t - last_record >= controls.record_interval || t >= t_end) {
                record(t, y);
                last_record = t;
            }
            // k[0] belongs to the pre-projection state; refresh if projected.
            if (controls.project_polarization && controls.spin) k[0] = rhs(y);
        } else {
            ++traj.rejected;
        }

        if (adaptive) {
            const double factor =
                err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
            // A tiny h is legitimate when the remaining interval itself is
            // tiny; underflow means the controller collapsed mid-run.
            if (h < h_min && t_end - t > 100.0 * h_min)
                throw StiffnessError("integrate: step size underflow at t = " +
                                     std::to_string(t));
        }
    }
    if (traj.samples.empty() || traj.samples.back().t < t_end) record(t_end, y);
    return traj;
}

double fit_rotation_frequency(const Trajectory& traj, char which, int axis_a,
                              int axis_b) {
    if (traj.samples.size() < 3)
        throw Error("fit_rotation_frequency: not enough samples");
    if (axis_a < 0 || axis_a > 2 || axis_b < 0 || axis_b > 2 || axis_a == axis_b)
        throw Error("fit_rotation_frequency: invalid axis pair");
    std::vector<double> ts, phases;
    ts.reserve(traj.samples.size());
    phases.reserve(traj.samples.size());
    double prev = 0.0, offset = 0.0;
    bool first = true;
    for (const auto& s : traj.samples) {
        const Vec3& v = which == 'P' ? s.state.P : s.state.pi;
        const double va = v[axis_a], vb = v[axis_b];
        if (va == 0.0 && vb == 0.0)
            throw Error("fit_rotation_frequency: vector vanishes in the fit plane");
        double ph = std::atan2(vb, va);
        if (!first) {
            // Unwrap: the sampling is dense enough that |step| < pi.
            while (ph + offset - prev > M_PI) offset -= 2.0 * M_PI;
            while (ph + offset - prev < -M_PI) offset += 2.0 * M_PI;
        }
        first = false;
        prev = ph + offset;
        ts.push_back(s.t);
        phases.push_back(prev);
    }
    const size_t n = ts.size();
    double st = 0, sp = 0, stt = 0, stp = 0;
    for (size_t i = 0; i < n; ++i) {
        st += ts[i];
        sp += phases[i];
        stt += ts[i] * ts[i];
        stp += ts[i] * phases[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw Error("fit_rotation_frequency: degenerate time axis");
    return (n * stp - st * sp) / denom;
}

}  // namespace fwt
