#pragma once

#include "fwt/errors.hpp"

namespace fwt {

// Physical constants and particle attributes. Natural units (m = c = hbar =
// |e| = 1) are the default; every constant is overridable, and hbar in
// particular is varied by the scaling probes. The derived moments are
// recomputed on access so that rescaling hbar rescales them linearly.
struct ParticleParams {
    double m = 1.0;      // mass, > 0
    double e = 1.0;      // signed charge
    double g = 2.0;      // g-factor
    double eta = 0.0;    // electric-dipole analogue of g
    double c = 1.0;      // speed of light, > 0
    double hbar = 1.0;   // Planck constant, > 0

    // Dirac magnetic moment e*hbar/(2mc).
    double mu0() const { return e * hbar / (2.0 * m * c); }
    // Anomalous magnetic moment, the (g-2)/2 share of mu0.
    double mu_prime() const { return 0.5 * (g - 2.0) * mu0(); }
    // Electric dipole moment, eta playing the role of g.
    double d_edm() const { return 0.5 * eta * mu0(); }

    double mc2() const { return m * c * c; }

    void validate() const {
        if (!(m > 0.0)) throw Error("ParticleParams: m must be > 0");
        if (!(c > 0.0)) throw Error("ParticleParams: c must be > 0");
        if (!(hbar > 0.0)) throw Error("ParticleParams: hbar must be > 0");
    }

    ParticleParams with_hbar(double h) const {
        ParticleParams p = *this;
        p.hbar = h;
        return p;
    }
};

}  // namespace fwt
