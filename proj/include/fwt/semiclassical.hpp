#pragma once

#include <map>
#include <string>
#include <vector>

#include "fwt/fields.hpp"
#include "fwt/particle.hpp"

namespace fwt {

// Semiclassical state: position, kinetic momentum, polarization unit vector.
struct PhaseSpinState {
    Vec3 r = Vec3::Zero();
    Vec3 pi = Vec3::Zero();
    Vec3 P = Vec3::Zero();  // |P| = 1 for spin runs, zero for scalar runs

    double eps_prime(const ParticleParams& p) const;
};

// Right-hand sides with every term individually retrievable. The force
// splits into the Lorentz part (no Planck constant) and the gradient part
// (first order in hbar through mu', mu0); the spin rate is the full
// precession generator divided by hbar, so that at rest in a uniform field
// |dP/dt| = g mu0 B / hbar.
struct SpinHalfRhs {
    Vec3 dpi = Vec3::Zero();
    Vec3 dP = Vec3::Zero();
    std::map<std::string, Vec3> force_terms;  // lorentz_E, lorentz_B, gradient_*
    std::map<std::string, Vec3> spin_terms;   // precession_*, spin_orbit_*, edm_*
    Vec3 lorentz_part() const;
    Vec3 gradient_part() const;
};

SpinHalfRhs rhs_spin_half(const PhaseSpinState& s, const FieldConfiguration& fields,
                          const ParticleParams& params);

// Scalar-particle force: e E + (e c / eps') (pi x H).
Vec3 rhs_scalar(const PhaseSpinState& s, const FieldConfiguration& fields,
                const ParticleParams& params);

struct ValidityReport {
    double lambda_over_l = 0.0;   // de Broglie wavelength / field scale
    double pl_over_hbar = 0.0;    // |pi| l / hbar
    double lambda = 0.0;          // 2 pi hbar / |pi| (convention recorded here)
    bool ok = true;
};

// Threshold on lambda/l; default 0.05.
ValidityReport validity_report(const PhaseSpinState& s, const FieldConfiguration& fields,
                               const ParticleParams& params, double threshold = 0.05);

struct IntegratorControls {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;     // 0: choose automatically
    double fixed_step = 0.0;       // > 0: disable adaptivity (order tests)
    long max_steps = 50'000'000;
    double record_interval = 0.0;  // 0: record every accepted step
    bool spin = true;              // integrate dP/dt alongside the force
    bool project_polarization = false;  // optional |P| renormalization
    bool allow_invalid = false;    // override the initial validity gate
    double validity_threshold = 0.05;
};

struct TrajectorySample {
    double t = 0.0;
    PhaseSpinState state;
    double eps_prime = 0.0;
    double energy = 0.0;        // eps' + e Phi
    double polarization_norm = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    long accepted = 0, rejected = 0;
    double max_polarization_drift = 0.0;  // max | |P| - 1 |
    double max_energy_drift = 0.0;        // relative, against the initial energy
    bool validity_violated = false;       // lambda/l crossed the threshold mid-run
    double worst_lambda_over_l = 0.0;
};

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) over
// dr/dt = c^2 pi / eps', dpi/dt, dP/dt. rhs_spin_half / rhs_scalar supply
// the momentum and spin rates; the velocity relation is the Hamiltonian one
// forced by H = beta eps' + e Phi. |P| drift is recorded, never silently
// corrected (projection is opt-in). Throws ValidityError if the initial
// state fails the validity gate and allow_invalid is unset; StiffnessError
// on step-size underflow.
Trajectory integrate(const PhaseSpinState& initial, const FieldConfiguration& fields,
                     const ParticleParams& params, double t_end,
                     const IntegratorControls& controls = {});

// Unwrapped-phase least-squares angular frequency of the (a, b) components
// of a recorded vector series; the workhorse behind precession and
// cyclotron frequency measurements.
double fit_rotation_frequency(const Trajectory& traj, char which /* 'P' or 'p' */,
                              int axis_a = 0, int axis_b = 1);

}  // namespace fwt
