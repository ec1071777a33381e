#include "fwt/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fwt {

namespace {

const Eigen::Matrix3d kZero3 = Eigen::Matrix3d::Zero();

std::function<Vec3(const Vec3&)> constant_field(const Vec3& v) {
    return [v](const Vec3&) { return v; };
}

std::function<Eigen::Matrix3d(const Vec3&)> zero_jacobian() {
    return [](const Vec3&) { return kZero3; };
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

}  // namespace

FieldConfiguration FieldConfiguration::zero() {
    FieldConfiguration f;
    f.Phi = [](const Vec3&) { return 0.0; };
    f.A = constant_field(Vec3::Zero());
    f.E = constant_field(Vec3::Zero());
    f.H = constant_field(Vec3::Zero());
    f.dE = zero_jacobian();
    f.dH = zero_jacobian();
    f.description = "free space";
    return f;
}

FieldConfiguration FieldConfiguration::uniform_E(const Vec3& e0) {
    FieldConfiguration f = zero();
    f.Phi = [e0](const Vec3& r) { return -e0.dot(r); };
    f.E = constant_field(e0);
    f.description = "uniform electric field";
    return f;
}

FieldConfiguration FieldConfiguration::uniform_B(const Vec3& b0) {
    FieldConfiguration f = zero();
    f.A = [b0](const Vec3& r) { return Vec3(0.5 * b0.cross(r)); };
    f.H = constant_field(b0);
    f.description = "uniform magnetic field";
    return f;
}

FieldConfiguration FieldConfiguration::gaussian_well(double depth, double width,
                                                     double center) {
    FieldConfiguration f = zero();
    const double w2 = width * width;
    auto envelope = [depth, w2, center](double x) {
        const double u = x - center;
        return depth * std::exp(-u * u / (2.0 * w2));
    };
    f.Phi = [envelope](const Vec3& r) { return -envelope(r.x()); };
    f.E = [envelope, w2, center](const Vec3& r) {
        const double u = r.x() - center;
        return Vec3(-envelope(r.x()) * u / w2, 0.0, 0.0);
    };
    f.dE = [envelope, w2, center](const Vec3& r) {
        const double u = r.x() - center;
        Eigen::Matrix3d j = kZero3;
        j(0, 0) = envelope(r.x()) * (u * u / w2 - 1.0) / w2;
        return j;
    };
    f.length_scale = width;
    f.description = "gaussian potential well";
    return f;
}

FieldConfiguration FieldConfiguration::linear_gradient_B(double b0, double grad_b) {
    FieldConfiguration f = zero();
    f.A = [b0, grad_b](const Vec3& r) {
        return Vec3(0.0, b0 * r.x() + grad_b * r.x() * r.z(), 0.0);
    };
    f.H = [b0, grad_b](const Vec3& r) {
        return Vec3(-grad_b * r.x(), 0.0, b0 + grad_b * r.z());
    };
    f.dH = [grad_b](const Vec3&) {
        Eigen::Matrix3d j = kZero3;
        j(0, 0) = -grad_b;
        j(2, 2) = grad_b;
        return j;
    };
    if (grad_b != 0.0)
        f.length_scale = (b0 != 0.0 ? std::abs(b0) : 1.0) / std::abs(grad_b);
    f.description = "magnetic field with linear gradient";
    return f;
}

FieldConfiguration FieldConfiguration::sine_E(double e0, double box_length) {
    FieldConfiguration f = zero();
    const double k = 2.0 * M_PI / box_length;
    f.Phi = [e0, k](const Vec3& r) { return -(e0 / k) * std::sin(k * r.x()); };
    f.E = [e0, k](const Vec3& r) { return Vec3(e0 * std::cos(k * r.x()), 0.0, 0.0); };
    f.dE = [e0, k](const Vec3& r) {
        Eigen::Matrix3d j = kZero3;
        j(0, 0) = -e0 * k * std::sin(k * r.x());
        return j;
    };
    f.length_scale = 1.0 / k;
    f.description = "single-mode electric field";
    return f;
}

FieldConfiguration FieldConfiguration::sine_B(double b0, double box_length) {
    FieldConfiguration f = zero();
    const double k = 2.0 * M_PI / box_length;
    f.A = [b0, k](const Vec3& r) {
        return Vec3(0.0, (b0 / k) * std::sin(k * r.x()), 0.0);
    };
    f.H = [b0, k](const Vec3& r) { return Vec3(0.0, 0.0, b0 * std::cos(k * r.x())); };
    f.dH = [b0, k](const Vec3& r) {
        Eigen::Matrix3d j = kZero3;
        j(2, 0) = -b0 * k * std::sin(k * r.x());
        return j;
    };
    f.length_scale = 1.0 / k;
    f.description = "single-mode magnetic field";
    return f;
}

FieldConfiguration FieldConfiguration::sine_EB(double e0, double b0, double box_length) {
    FieldConfiguration fe = sine_E(e0, box_length);
    FieldConfiguration fb = sine_B(b0, box_length);
    FieldConfiguration f = zero();
    f.Phi = fe.Phi;
    f.A = fb.A;
    f.E = fe.E;
    f.H = fb.H;
    f.dE = fe.dE;
    f.dH = fb.dH;
    f.length_scale = fe.length_scale;
    f.description = "single-mode electric and magnetic fields";
    return f;
}

FieldConfiguration FieldConfiguration::from_table_csv(const std::string& path,
                                                      double length_scale) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open field table: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("field table is empty: " + path);
    const std::vector<std::string> header = split_csv(line);
    const std::vector<std::string> required = {"x", "Phi", "Ax", "Ay", "Az"};
    if (header.size() < required.size())
        throw ParseError("field table needs columns x,Phi,Ax,Ay,Az: " + path);
    for (size_t i = 0; i < required.size(); ++i)
        if (header[i] != required[i])
            throw ParseError("field table column " + std::to_string(i + 1) +
                             " must be '" + required[i] + "', got '" + header[i] + "'");
    // Optional strength columns for cross-checking the spline-derived values.
    // Only Ex, Hy, Hz can be nonzero for configurations depending on x alone.
    std::vector<std::string> extras(header.begin() + required.size(), header.end());
    for (const auto& name : extras)
        if (name != "Ex" && name != "Hy" && name != "Hz")
            throw ParseError("unknown field table column '" + name + "'");

    std::vector<std::vector<double>> cols(header.size());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size())
            throw ParseError("field table line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        for (size_t i = 0; i < cells.size(); ++i) {
            try {
                size_t used = 0;
                const double v = std::stod(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
                cols[i].push_back(v);
            } catch (const std::exception&) {
                throw ParseError("field table line " + std::to_string(line_no) +
                                 ": cannot parse '" + cells[i] + "' as a number");
            }
        }
    }
    const size_t n = cols[0].size();
    if (n < 4) throw ParseError("field table needs at least 4 rows: " + path);
    for (size_t i = 1; i < n; ++i)
        if (cols[0][i] <= cols[0][i - 1])
            throw ParseError("field table x values must be strictly increasing");

    CubicSpline phi(cols[0], cols[1]);
    CubicSpline ay(cols[0], cols[3]);
    CubicSpline az(cols[0], cols[4]);

    // Cross-check any explicit strength columns against the derived ones.
    // Slack covers the interpolation error of smooth, densely sampled tables;
    // genuine mismatches (wrong sign, wrong scale) are far above it.
    const double check_tol = 5e-3;
    for (size_t e = 0; e < extras.size(); ++e) {
        const std::vector<double>& given = cols[required.size() + e];
        double scale = 1e-12, worst = 0.0, worst_x = cols[0][0];
        for (size_t i = 0; i < n; ++i) {
            double derived = 0.0;
            if (extras[e] == "Ex") derived = -phi.derivative(cols[0][i]);
            else if (extras[e] == "Hy") derived = -az.derivative(cols[0][i]);
            else derived = ay.derivative(cols[0][i]);
            scale = std::max({scale, std::abs(given[i]), std::abs(derived)});
            const double dev = std::abs(derived - given[i]);
            if (dev > worst) {
                worst = dev;
                worst_x = cols[0][i];
            }
        }
        if (worst > check_tol * scale)
            throw FieldConsistencyError(
                "field table column '" + extras[e] + "' disagrees with the value " +
                "derived from the potentials: worst deviation " + std::to_string(worst) +
                " at x = " + std::to_string(worst_x));
    }

    FieldConfiguration f = zero();
    f.Phi = [phi](const Vec3& r) { return phi.value(r.x()); };
    f.A = [ay, az](const Vec3& r) {
        return Vec3(0.0, ay.value(r.x()), az.value(r.x()));
    };
    f.E = [phi](const Vec3& r) { return Vec3(-phi.derivative(r.x()), 0.0, 0.0); };
    f.H = [ay, az](const Vec3& r) {
        return Vec3(0.0, -az.derivative(r.x()), ay.derivative(r.x()));
    };
    f.dE = [phi](const Vec3& r) {
        Eigen::Matrix3d j = kZero3;
        j(0, 0) = -phi.second_derivative(r.x());
        return j;
    };
    f.dH = [ay, az](const Vec3& r) {
        Eigen::Matrix3d j = kZero3;
        j(1, 0) = -az.second_derivative(r.x());
        j(2, 0) = ay.second_derivative(r.x());
        return j;
    };
    f.length_scale =
        length_scale > 0.0 ? length_scale : (cols[0][n - 1] - cols[0][0]) / 10.0;
    f.domain_lo = cols[0][0];
    f.domain_hi = cols[0][n - 1];
    f.description = "tabulated field: " + path;
    return f;
}

ConsistencyReport check_field_consistency(const FieldConfiguration& f,
                                          const std::vector<Vec3>& samples,
                                          double tol, bool throw_on_fail) {
    ConsistencyReport rep;
    double scale_E = 1e-12, scale_H = 1e-12;
    for (const Vec3& r : samples) {
        Vec3 grad_phi = Vec3::Zero(), curl_a = Vec3::Zero();
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(r[j]));
            Vec3 rp = r, rm = r;
            rp[j] += h;
            rm[j] -= h;
            grad_phi[j] = (f.Phi(rp) - f.Phi(rm)) / (2.0 * h);
            // Accumulate the two curl contributions of the d/dx_j slice:
            // curl_i = eps_{ijk} dA_k/dx_j.
            const Vec3 da = (f.A(rp) - f.A(rm)) / (2.0 * h);
            if (j == 0) {
                curl_a[1] -= da[2];
                curl_a[2] += da[1];
            } else if (j == 1) {
                curl_a[2] -= da[0];
                curl_a[0] += da[2];
            } else {
                curl_a[0] -= da[1];
                curl_a[1] += da[0];
            }
        }
        const Vec3 e = f.E(r), h_field = f.H(r);
        scale_E = std::max({scale_E, e.norm(), grad_phi.norm()});
        scale_H = std::max({scale_H, h_field.norm(), curl_a.norm()});
        const double dev_e = (e + grad_phi).norm();
        const double dev_h = (h_field - curl_a).norm();
        if (dev_e > rep.max_E_deviation) {
            rep.max_E_deviation = dev_e;
            rep.worst_E_location = r;
        }
        if (dev_h > rep.max_H_deviation) {
            rep.max_H_deviation = dev_h;
            rep.worst_H_location = r;
        }
    }
    rep.ok = rep.max_E_deviation <= tol * scale_E && rep.max_H_deviation <= tol * scale_H;
    if (!rep.ok && throw_on_fail) {
        std::ostringstream msg;
        msg << "field configuration '" << f.description << "' is inconsistent: ";
        if (rep.max_E_deviation > tol * scale_E)
            msg << "|E + grad Phi| = " << rep.max_E_deviation << " at ("
                << rep.worst_E_location.transpose() << ") ";
        if (rep.max_H_deviation > tol * scale_H)
            msg << "|H - curl A| = " << rep.max_H_deviation << " at ("
                << rep.worst_H_location.transpose() << ")";
        throw FieldConsistencyError(msg.str());
    }
    return rep;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 3 || y_.size() != n)
        throw ParseError("cubic spline needs at least 3 matching nodes");
    m_.assign(n, 0.0);
    // Natural end conditions; Thomas solve for interior second derivatives.
    std::vector<double> diag(n, 2.0), rhs(n, 0.0), sub(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        sub[i] = hl / (hl + hr);
        rhs[i] = 6.0 / (hl + hr) *
                 ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    std::vector<double> c(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double up = 1.0 - sub[i];
        const double w = diag[i] - sub[i] * c[i - 1];
        c[i] = up / w;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / w;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = rhs[i] - c[i] * m_[i + 1];
}

int CubicSpline::interval(double x) const {
    const double span = x_.back() - x_.front();
    const double slack = 1e-12 * span;
    if (x < x_.front() - slack || x > x_.back() + slack)
        throw FieldDomainError("evaluation point " + std::to_string(x) +
                               " outside the tabulated range [" +
                               std::to_string(x_.front()) + ", " +
                               std::to_string(x_.back()) + "]");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int i = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double CubicSpline::value(double x) const {
    const int i = interval(x);
    const double h = x_[i + 1] - x_[i], t = x - x_[i];
    const double b =
        (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return y_[i] + t * (b + t * (0.5 * m_[i] + t * d));
}

double CubicSpline::derivative(double x) const {
    const int i = interval(x);
    const double h = x_[i + 1] - x_[i], t = x - x_[i];
    const double b =
        (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return b + t * (m_[i] + 3.0 * t * d);
}

double CubicSpline::second_derivative(double x) const {
    const int i = interval(x);
    const double h = x_[i + 1] - x_[i], t = x - x_[i];
    return m_[i] + (m_[i + 1] - m_[i]) * t / h;
}

}  // namespace fwt
