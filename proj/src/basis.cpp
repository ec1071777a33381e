#include "fwt/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fwt {

namespace {
constexpr double pi_v = std::numbers::pi;
}

SpectralGrid::SpectralGrid(int n, double length, double p_transverse_y,
                           double p_transverse_z)
    : n_(n), length_(length), py_(p_transverse_y), pz_(p_transverse_z) {
    if (n < 4 || n % 2 != 0) throw Error("SpectralGrid: n must be even and >= 4");
    if (!(length > 0.0)) throw Error("SpectralGrid: length must be > 0");
    x_.resize(n_);
    k_.resize(n_);
    const double dx = length_ / n_;
    const double dk = 2.0 * pi_v / length_;
    for (int j = 0; j < n_; ++j) {
        x_[j] = j * dx;
        const int f = (j <= n_ / 2) ? j : j - n_;  // fft frequency ordering
        k_[j] = dk * f;
    }
    k_[n_ / 2] = 0.0;  // drop the unpaired Nyquist mode; keeps the spectrum symmetric
}

double SpectralGrid::k_max() const { return 2.0 * pi_v / length_ * (n_ / 2 - 1); }

Matrix SpectralGrid::momentum(double hbar) const {
    // p = F^* diag(hbar k) F with the unitary DFT; assembled directly and
    // re-hermitized to kill the last round-off asymmetry.
    Matrix f(n_, n_);
    const Complex w0(0.0, -2.0 * pi_v / n_);
    for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) f(r, c) = std::exp(w0 * double(r) * double(c));
    Matrix p = f.adjoint() * (hbar * k_.cast<Complex>()).asDiagonal() * f / double(n_);
    return 0.5 * (p + p.adjoint().eval());
}

CVector SpectralGrid::packet(double x0, double p0, double sigma, double hbar) const {
    if (!(sigma > 0.0)) throw Error("packet: sigma must be > 0");
    if (!(hbar > 0.0)) throw Error("packet: hbar must be > 0");
    const double quantum = 2.0 * pi_v * hbar / length_;
    const double p0s = quantum * std::round(p0 / quantum);
    CVector psi(n_);
    for (int j = 0; j < n_; ++j) {
        const double d = x_[j] - x0;
        psi[j] = std::exp(Complex(-d * d / (4.0 * sigma * sigma), p0s * x_[j] / hbar));
    }
    psi /= psi.norm();
    return psi;
}

std::string SpectralGrid::tag() const {
    std::ostringstream os;
    os << "grid:n=" << n_ << ",L=" << length_ << ",py=" << py_ << ",pz=" << pz_;
    return os.str();
}

std::string MomentumBlock::tag() const {
    std::ostringstream os;
    os << "momentum:(" << p.x() << "," << p.y() << "," << p.z() << ")";
    return os.str();
}

std::string scheme_tag(const Scheme& s) {
    return std::visit([](const auto& v) { return v.tag(); }, s);
}

int scheme_points(const Scheme& s) {
    if (std::holds_alternative<SpectralGrid>(s)) return std::get<SpectralGrid>(s).n();
    return 1;
}

}  // namespace fwt
