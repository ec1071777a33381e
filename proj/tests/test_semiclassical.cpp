#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fwt/semiclassical.hpp"

using namespace fwt;

namespace {

PhaseSpinState rest_state(const Vec3& pol) {
    PhaseSpinState s;
    s.P = pol;
    return s;
}

}  // namespace

TEST_CASE("rate terms are individually labeled and sum to the totals") {
    ParticleParams params;
    params.g = 2.002319;
    params.eta = 0.1;
    params.hbar = 1.0;
    const FieldConfiguration f = FieldConfiguration::linear_gradient_B(0.4, 0.03);
    PhaseSpinState s;
    s.r = Vec3(0.3, -0.2, 0.5);
    s.pi = Vec3(0.4, 0.1, -0.2);
    s.P = Vec3(0, 0, 1);

    const SpinHalfRhs rhs = rhs_spin_half(s, f, params);
    CHECK(rhs.force_terms.count("lorentz_B") == 1);
    CHECK(rhs.spin_terms.size() >= 2);

    Vec3 force_sum = Vec3::Zero(), spin_sum = Vec3::Zero();
    for (const auto& [name, v] : rhs.force_terms) force_sum += v;
    for (const auto& [name, v] : rhs.spin_terms) spin_sum += v;
    CHECK((force_sum - rhs.dpi).norm() <= 1e-14 * std::max(1.0, rhs.dpi.norm()));
    CHECK((spin_sum - rhs.dP).norm() <= 1e-14 * std::max(1.0, rhs.dP.norm()));
    CHECK((rhs.lorentz_part() + rhs.gradient_part() - rhs.dpi).norm() <=
          1e-14 * std::max(1.0, rhs.dpi.norm()));

    // The gradient share carries the moments and vanishes with them.
    ParticleParams dirac = params;
    dirac.g = 2.0;
    dirac.eta = 0.0;
    const SpinHalfRhs rhs_d = rhs_spin_half(s, f, dirac);
    // mu0 remains, so only the anomalous part of the gradient force differs.
    CHECK(rhs_d.lorentz_part() == rhs.lorentz_part());
}

TEST_CASE("rest precession rate is exactly g mu0 B / hbar") {
    ParticleParams params;
    params.g = 2.002319;
    params.hbar = 1.0;
    const double b = 0.7;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, b));
    const PhaseSpinState s = rest_state(Vec3(1, 0, 0));
    const SpinHalfRhs rhs = rhs_spin_half(s, f, params);
    const double expect = params.g * params.mu0() * b / params.hbar;
    CHECK(rhs.dP.norm() == doctest::Approx(expect).epsilon(1e-13));
    CHECK(rhs.dpi.norm() <= 1e-15);  // no force at rest in a pure B field
    // dP/dt = Omega x P is perpendicular to both P and B here.
    CHECK(std::abs(rhs.dP.dot(s.P)) <= 1e-15);
    CHECK(std::abs(rhs.dP[2]) <= 1e-15);
}

TEST_CASE("scalar force is Lorentz only") {
    ParticleParams params;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, 0.5));
    PhaseSpinState s;
    s.pi = Vec3(0.8, 0, 0);
    const Vec3 force = rhs_scalar(s, f, params);
    const double eps = std::sqrt(1.0 + 0.64);
    const Vec3 expect = params.e * params.c / eps * s.pi.cross(Vec3(0, 0, 0.5));
    CHECK((force - expect).norm() <= 1e-14);
}

TEST_CASE("gradient force against a finite difference of the moment energy") {
    // Static limit: pi = 0, B varying linearly. The force reduces to
    // +grad(mu . B) with mu = (g/2) mu0 P; check component by component
    // against a numerical gradient of the interaction energy.
    ParticleParams params;
    params.g = 2.4;
    params.hbar = 0.3;  // moments scale with hbar
    const FieldConfiguration f = FieldConfiguration::linear_gradient_B(0.5, 0.07);
    PhaseSpinState s;
    s.r = Vec3(0.2, 0.0, -0.4);
    s.P = Vec3(0.3, -0.5, std::sqrt(1.0 - 0.09 - 0.25));

    const SpinHalfRhs rhs = rhs_spin_half(s, f, params);
    const double mu = 0.5 * params.g * params.mu0();
    const double h = 1e-6;
    Vec3 fd = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
        Vec3 ra = s.r, rb = s.r;
        ra[k] += h;
        rb[k] -= h;
        fd[k] = mu * (s.P.dot(f.H(ra)) - s.P.dot(f.H(rb))) / (2.0 * h);
    }
    CHECK((rhs.dpi - fd).norm() <= 1e-8 * std::max(1.0, fd.norm()));
}

TEST_CASE("uniform-field cyclotron orbit: frequency, velocity, energy") {
    ParticleParams params;
    const double b = 1.0, pi0 = 1.0;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, b));
    PhaseSpinState s0;
    s0.pi = Vec3(pi0, 0, 0);
    s0.P = Vec3(0, 0, 1);
    const double eps = std::sqrt(1.0 + pi0 * pi0);
    const double omega = params.e * params.c * b / eps;  // signed magnitude
    const double period = 2.0 * M_PI / omega;

    IntegratorControls ctl;
    ctl.rel_tol = 1e-12;
    ctl.abs_tol = 1e-14;
    ctl.record_interval = period / 64.0;
    const Trajectory traj = integrate(s0, f, params, 3.0 * period, ctl);

    CHECK(traj.max_energy_drift <= 1e-10);
    CHECK(traj.max_polarization_drift <= 1e-10);
    const double w_fit = fit_rotation_frequency(traj, 'p', 0, 1);
    CHECK(std::abs(std::abs(w_fit) - omega) <= 1e-9 * omega);

    // Radius r = c pi / (e B): the orbit stays on that circle.
    const double radius = params.c * pi0 / (params.e * b);
    const Vec3 center = s0.r + Vec3(0, -radius, 0) * (params.e > 0 ? 1.0 : -1.0);
    for (const TrajectorySample& smp : traj.samples) {
        const double d = (smp.state.r - center).head<2>().norm();
        CHECK(std::abs(d - radius) <= 1e-8 * radius);
        // Velocity magnitude c^2 pi / eps stays put.
        CHECK(smp.state.pi.norm() == doctest::Approx(pi0).epsilon(1e-10));
    }
}

TEST_CASE("fixed-step error scales at fifth order") {
    // Halving the step of the non-adaptive integrator divides the endpoint
    // error by about 2^5.
    ParticleParams params;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, 1.0));
    PhaseSpinState s0;
    s0.pi = Vec3(1.0, 0, 0);
    s0.P = Vec3(0, 0, 1);
    const double eps = std::sqrt(2.0);
    const double period = 2.0 * M_PI * eps;

    auto endpoint = [&](double step) {
        IntegratorControls ctl;
        ctl.fixed_step = step;
        ctl.record_interval = period;  // endpoint only
        const Trajectory t = integrate(s0, f, params, period, ctl);
        return t.samples.back().state;
    };
    // Exact solution returns to the start after one period.
    const PhaseSpinState e1 = endpoint(period / 200.0);
    const PhaseSpinState e2 = endpoint(period / 400.0);
    const double err1 = (e1.r - s0.r).norm() + (e1.pi - s0.pi).norm();
    const double err2 = (e2.r - s0.r).norm() + (e2.pi - s0.pi).norm();
    const double ratio = err1 / err2;
    CHECK(ratio > 20.0);
    CHECK(ratio < 45.0);
}

TEST_CASE("validity gate throws, and the override records instead") {
    // Long de Broglie wavelength against a short field scale: lambda / l
    // far beyond the threshold.
    ParticleParams params;
    params.hbar = 1.0;
    const FieldConfiguration f = FieldConfiguration::gaussian_well(0.2, 0.5, 10.0);
    PhaseSpinState s0;
    s0.r = Vec3(10.0, 0, 0);
    s0.pi = Vec3(0.05, 0, 0);  // lambda = 2 pi / 0.05 >> l = 0.5
    s0.P = Vec3(0, 0, 1);

    const ValidityReport rep = validity_report(s0, f, params);
    CHECK(rep.ok == false);
    CHECK(rep.lambda_over_l > 1.0);

    IntegratorControls ctl;
    CHECK_THROWS_AS(integrate(s0, f, params, 1.0, ctl), ValidityError);

    ctl.allow_invalid = true;
    const Trajectory traj = integrate(s0, f, params, 1.0, ctl);
    CHECK(traj.validity_violated);
    CHECK(traj.worst_lambda_over_l > 1.0);
}

TEST_CASE("uniform fields never trip the validity gate") {
    // Infinite field scale: lambda / l is zero by convention.
    ParticleParams params;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, 2.0));
    PhaseSpinState s0;
    s0.pi = Vec3(1e-4, 0, 0);  // huge wavelength, but l is infinite
    s0.P = Vec3(1, 0, 0);
    const ValidityReport rep = validity_report(s0, f, params);
    CHECK(rep.ok);
    CHECK(rep.lambda_over_l == 0.0);
}

TEST_CASE("polarization projection is opt-in") {
    ParticleParams params;
    params.g = 2.002319;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, 1.0));
    PhaseSpinState s0;
    s0.pi = Vec3(0.5, 0, 0);
    s0.P = Vec3(1, 0, 0);

    IntegratorControls ctl;
    ctl.rel_tol = 1e-10;
    ctl.abs_tol = 1e-12;
    ctl.record_interval = 0.5;
    ctl.project_polarization = true;
    const Trajectory traj = integrate(s0, f, params, 20.0, ctl);
    for (const TrajectorySample& smp : traj.samples)
        CHECK(smp.polarization_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frequency fit needs a rotating signal and enough samples") {
    ParticleParams params;
    const FieldConfiguration f = FieldConfiguration::uniform_B(Vec3(0, 0, 1.0));
    PhaseSpinState s0;
    s0.pi = Vec3(1.0, 0, 0);
    s0.P = Vec3(0, 0, 1);
    IntegratorControls ctl;
    ctl.record_interval = 0.05;
    const Trajectory traj = integrate(s0, f, params, 2.0, ctl);

    // P is pinned along z here: no rotation in the (0,1) plane to fit.
    CHECK_THROWS_AS(fit_rotation_frequency(traj, 'P', 0, 1), Error);

    Trajectory tiny;
    tiny.samples.assign(traj.samples.begin(), traj.samples.begin() + 2);
    CHECK_THROWS_AS(fit_rotation_frequency(tiny, 'p', 0, 1), Error);
}
