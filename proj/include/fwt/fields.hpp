#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fwt/basis.hpp"
#include "fwt/errors.hpp"

namespace fwt {

// Static electromagnetic configuration: potentials and strengths as
// evaluable functions of position, plus the strength jacobians needed by the
// gradient (Stern-Gerlach class) force terms. Consistency of the stationary
// relations E = -grad Phi and H = curl A is checkable by finite differences.
struct FieldConfiguration {
    std::function<double(const Vec3&)> Phi;
    std::function<Vec3(const Vec3&)> A;
    std::function<Vec3(const Vec3&)> E;
    std::function<Vec3(const Vec3&)> H;
    // Jacobians d E_i / d x_j and d H_i / d x_j (row i, column j).
    std::function<Eigen::Matrix3d(const Vec3&)> dE;
    std::function<Eigen::Matrix3d(const Vec3&)> dH;

    // Characteristic nonuniformity size l. Uniform configurations use
    // +infinity: the semiclassical validity ratio lambda/l is then zero,
    // matching the physics (no gradients, no quantum corrections).
    double length_scale = std::numeric_limits<double>::infinity();

    // x-range on which evaluation is defined; finite only for tabulated
    // configurations, where stepping outside throws FieldDomainError.
    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();

    std::string description;

    static FieldConfiguration zero();
    static FieldConfiguration uniform_E(const Vec3& e0);
    static FieldConfiguration uniform_B(const Vec3& b0);  // A = B x r / 2
    // Attractive well Phi = -depth * exp(-(x-center)^2 / (2 width^2)),
    // electric field along x. length_scale = width.
    static FieldConfiguration gaussian_well(double depth, double width, double center);
    // Stern-Gerlach pair H = (-grad_b * x, 0, B0 + grad_b * z), divergence-
    // and curl-free, with A = (0, B0 x + grad_b x z, 0).
    static FieldConfiguration linear_gradient_B(double b0, double grad_b);
    // Single Fourier mode on a box of the given length (wavenumber 2 pi / L):
    // Phi = -(E0 / k) sin(k x) so E_x = E0 cos(k x). length_scale = 1/k.
    static FieldConfiguration sine_E(double e0, double box_length);
    // A_y = (B0 / k) sin(k x) so H_z = B0 cos(k x).
    static FieldConfiguration sine_B(double b0, double box_length);
    // Superposition of the two sine modes.
    static FieldConfiguration sine_EB(double e0, double b0, double box_length);

    // Fields interpolated from a sampled table of x, Phi, Ax, Ay, Az columns
    // (natural cubic splines; strengths from spline derivatives). Optional
    // explicit strength columns (Ex, Hy, Hz) are cross-checked against the
    // derived values and a mismatch raises FieldConsistencyError naming the
    // worst sample. length_scale defaults to the table span / 10 when not
    // given.
    static FieldConfiguration from_table_csv(const std::string& path,
                                             double length_scale = 0.0);
};

struct ConsistencyReport {
    bool ok = true;
    double max_E_deviation = 0.0;  // |E + grad Phi| worst case
    double max_H_deviation = 0.0;  // |H - curl A| worst case
    Vec3 worst_E_location = Vec3::Zero();
    Vec3 worst_H_location = Vec3::Zero();
};

// Finite-difference check of E = -grad Phi and H = curl A over the sample
// points. Throws FieldConsistencyError when the worst relative deviation
// exceeds tol (the message carries the location); returns the report
// otherwise.
ConsistencyReport check_field_consistency(const FieldConfiguration& f,
                                          const std::vector<Vec3>& samples,
                                          double tol = 1e-6,
                                          bool throw_on_fail = true);

// Natural cubic spline over strictly increasing nodes; evaluation outside
// the node range throws FieldDomainError.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    int interval(double x) const;
    std::vector<double> x_, y_, m_;  // m_: second derivatives at nodes
};

}  // namespace fwt
