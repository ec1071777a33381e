#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "fwt/errors.hpp"

namespace fwt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

// One-dimensional periodic spectral basis: n points on [0, L), position
// diagonal, momentum dense via the discrete Fourier transform. Fields may
// vary along x only; motion in y and z enters through constant transverse
// momentum parameters, which is what makes magnetic configurations with
// A = A_y(x) e_y representable on a 1-D grid with the correct commutator
// [pi_x, pi_y] = i hbar (e/c) H_z(x).
class SpectralGrid {
public:
    SpectralGrid(int n, double length, double p_transverse_y = 0.0,
                 double p_transverse_z = 0.0);

    int n() const { return n_; }
    double length() const { return length_; }
    double py() const { return py_; }
    double pz() const { return pz_; }
    double dx() const { return length_ / n_; }
    // Largest magnitude wavenumber carried by the basis (band edge).
    double k_max() const;

    const RVector& x() const { return x_; }
    // Canonical momentum matrix hbar * k in spectral representation. The
    // Nyquist mode is dropped (set to zero) so the operator is hermitian with
    // a symmetric spectrum; the band edge is where the discrete [x, p]
    // algebra is necessarily anomalous, and wavepacket-based diagnostics are
    // expected to stay clear of it.
    Matrix momentum(double hbar) const;

    // Normalized Gaussian packet exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar).
    // p0 is snapped to the nearest grid-commensurate value 2 pi hbar k / L so
    // the phase is exactly periodic; a non-commensurate momentum wraps
    // discontinuously at the boundary and leaks a slow spectral tail out to
    // the band edge, which poisons small-deviation measurements.
    CVector packet(double x0, double p0, double sigma, double hbar) const;

    std::string tag() const;

private:
    int n_;
    double length_, py_, pz_;
    RVector x_;
    RVector k_;  // wavenumbers, Nyquist zeroed
};

// Single numeric momentum value: operators act on spinor space only, with
// pi = p * identity. Valid for uniform fields, where every pi component
// commutes with everything in sight.
struct MomentumBlock {
    Vec3 p = Vec3::Zero();
    std::string tag() const;
};

using Scheme = std::variant<SpectralGrid, MomentumBlock>;

std::string scheme_tag(const Scheme& s);
// Number of spatial basis points (n for a grid, 1 for a momentum block).
int scheme_points(const Scheme& s);

}  // namespace fwt
