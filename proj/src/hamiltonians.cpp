#include "fwt/hamiltonians.hpp"

#include <cmath>

#include "fwt/matrix_functions.hpp"

namespace fwt {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;

const Complex kI(0.0, 1.0);

std::array<Matrix2cd, 3> pauli_matrices() {
    std::array<Matrix2cd, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, -kI, kI, 0;
    s[2] << 1, 0, 0, -1;
    return s;
}

// kron(spin, spatial): spinor components are the outer blocks, matching the
// beta_signature layout (upper components first).
Matrix kron_blocks(const Matrix& spin, const Matrix& spatial) {
    const int r = static_cast<int>(spin.rows());
    const int n = static_cast<int>(spatial.rows());
    Matrix out = Matrix::Zero(r * n, static_cast<int>(spin.cols()) * n);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < spin.cols(); ++j)
            if (spin(i, j) != Complex(0.0, 0.0))
                out.block(i * n, j * n, n, n) = spin(i, j) * spatial;
    return out;
}

Matrix diag_of(const RVector& v) {
    return v.cast<Complex>().asDiagonal();
}

}  // namespace

const DiracMatrices& dirac_matrices() {
    static const DiracMatrices d = [] {
        DiracMatrices m;
        const auto s = pauli_matrices();
        m.beta = Matrix4cd::Zero();
        m.beta.diagonal() << 1, 1, -1, -1;
        for (int i = 0; i < 3; ++i) {
            m.alpha[i] = Matrix4cd::Zero();
            m.alpha[i].block<2, 2>(0, 2) = s[i];
            m.alpha[i].block<2, 2>(2, 0) = s[i];
            m.gamma[i] = m.beta * m.alpha[i];
            m.Sigma[i] = Matrix4cd::Zero();
            m.Sigma[i].block<2, 2>(0, 0) = s[i];
            m.Sigma[i].block<2, 2>(2, 2) = s[i];
            m.Pi[i] = m.beta * m.Sigma[i];
        }
        return m;
    }();
    return d;
}

const std::array<Matrix2cd, 3>& rho_matrices() {
    static const std::array<Matrix2cd, 3> r = pauli_matrices();
    return r;
}

KineticStructure kinetic_structure(const FieldConfiguration& fields,
                                   const ParticleParams& params, const Scheme& scheme) {
    params.validate();
    KineticStructure ks;
    if (std::holds_alternative<SpectralGrid>(scheme)) {
        const SpectralGrid& grid = std::get<SpectralGrid>(scheme);
        const int n = grid.n();

        // The grid keeps only the x dependence of the fields. A potential
        // that varies along y or z would be silently replaced by its
        // y = z = 0 slice, i.e. a different field; refuse instead. (A uniform
        // transverse magnetic field is representable in the A = A_y(x) e_y
        // gauge; the symmetric gauge is not.)
        const double probe = 1e-3;
        for (const double xs : {grid.x()[0], grid.x()[n / 2], grid.x()[n - 1]}) {
            const Vec3 r0(xs, 0.0, 0.0);
            for (const Vec3& r : {Vec3(xs, probe, 0.0), Vec3(xs, 0.0, -probe)}) {
                const double dev =
                    std::abs(fields.Phi(r) - fields.Phi(r0)) +
                    (fields.A(r) - fields.A(r0)).norm() +
                    (fields.E(r) - fields.E(r0)).norm() +
                    (fields.H(r) - fields.H(r0)).norm();
                if (dev > 1e-9 * (1.0 + std::abs(fields.Phi(r0)) +
                                  fields.A(r0).norm() + fields.E(r0).norm() +
                                  fields.H(r0).norm()))
                    throw Unsupported(
                        "grid discretization: fields vary along y or z, which the "
                        "1-D basis cannot represent (for a transverse uniform "
                        "magnetic field use the A = A_y(x) gauge)");
            }
        }
        ks.points = n;
        ks.Phi.resize(n);
        for (int i = 0; i < 3; ++i) {
            ks.Evec[i].resize(n);
            ks.Hvec[i].resize(n);
        }
        RVector a[3] = {RVector(n), RVector(n), RVector(n)};
        for (int j = 0; j < n; ++j) {
            const Vec3 r(grid.x()[j], 0.0, 0.0);
            ks.Phi[j] = fields.Phi(r);
            const Vec3 av = fields.A(r), ev = fields.E(r), hv = fields.H(r);
            for (int i = 0; i < 3; ++i) {
                a[i][j] = av[i];
                ks.Evec[i][j] = ev[i];
                ks.Hvec[i][j] = hv[i];
            }
        }
        const double q = params.e / params.c;
        ks.pi[0] = grid.momentum(params.hbar) - q * diag_of(a[0]);
        ks.pi[1] = Matrix(grid.py() * RVector::Ones(n).cast<Complex>().asDiagonal()) -
                   q * diag_of(a[1]);
        ks.pi[2] = Matrix(grid.pz() * RVector::Ones(n).cast<Complex>().asDiagonal()) -
                   q * diag_of(a[2]);
    } else {
        // Momentum block: pi is the numeric kinetic momentum itself, fields
        // are uniform and sampled at the origin.
        const MomentumBlock& blk = std::get<MomentumBlock>(scheme);
        ks.points = 1;
        const Vec3 origin = Vec3::Zero();
        ks.Phi = RVector::Constant(1, fields.Phi(origin));
        const Vec3 ev = fields.E(origin), hv = fields.H(origin);
        for (int i = 0; i < 3; ++i) {
            ks.pi[i] = Matrix::Constant(1, 1, Complex(blk.p[i], 0.0));
            ks.Evec[i] = RVector::Constant(1, ev[i]);
            ks.Hvec[i] = RVector::Constant(1, hv[i]);
        }
    }
    return ks;
}

HamiltonianTriple build_dirac_pauli(const FieldConfiguration& fields,
                                    const ParticleParams& params, const Scheme& scheme) {
    const KineticStructure ks = kinetic_structure(fields, params, scheme);
    const DiracMatrices& d = dirac_matrices();
    const int n = ks.points;
    const std::string tag = scheme_tag(scheme);
    const Matrix eye4 = Matrix4cd::Identity();

    Matrix m_part = params.mc2() * Matrix::Identity(4 * n, 4 * n);

    Matrix e_part = kron_blocks(eye4, params.e * diag_of(ks.Phi));
    for (int i = 0; i < 3; ++i) {
        e_part -= params.mu_prime() * kron_blocks(d.Pi[i], diag_of(ks.Hvec[i]));
        e_part -= params.d_edm() * kron_blocks(d.Pi[i], diag_of(ks.Evec[i]));
    }

    Matrix o_part = Matrix::Zero(4 * n, 4 * n);
    for (int i = 0; i < 3; ++i) {
        o_part += params.c * kron_blocks(d.alpha[i], ks.pi[i]);
        o_part += kI * params.mu_prime() * kron_blocks(d.gamma[i], diag_of(ks.Evec[i]));
        o_part -= kI * params.d_edm() * kron_blocks(d.gamma[i], diag_of(ks.Hvec[i]));
    }

    return {{std::move(m_part), 4, tag}, {std::move(e_part), 4, tag},
            {std::move(o_part), 4, tag}};
}

HamiltonianTriple build_feshbach_villars(const FieldConfiguration& fields,
                                         const ParticleParams& params,
                                         const Scheme& scheme) {
    const KineticStructure ks = kinetic_structure(fields, params, scheme);
    const auto& rho = rho_matrices();
    const int n = ks.points;
    const std::string tag = scheme_tag(scheme);

    Matrix k2 = Matrix::Zero(n, n);
    for (int i = 0; i < 3; ++i) k2 += ks.pi[i] * ks.pi[i];
    k2 = 0.5 * (k2 + k2.adjoint().eval());
    const Matrix half_k2 = k2 / (2.0 * params.m);

    Matrix m_part = params.mc2() * Matrix::Identity(2 * n, 2 * n) +
                    kron_blocks(Matrix2cd::Identity(), half_k2);
    Matrix e_part = kron_blocks(Matrix2cd::Identity(), params.e * diag_of(ks.Phi));
    Matrix o_part = kron_blocks(kI * rho[1], half_k2);

    return {{std::move(m_part), 2, tag}, {std::move(e_part), 2, tag},
            {std::move(o_part), 2, tag}};
}

BlockOperator eval_fw_spin_half_analytic(const FieldConfiguration& fields,
                                         const ParticleParams& params,
                                         const Scheme& scheme) {
    const KineticStructure ks = kinetic_structure(fields, params, scheme);
    const DiracMatrices& d = dirac_matrices();
    const int n = ks.points;
    const double mc2 = params.mc2(), c = params.c;
    const double mu0 = params.mu0(), mup = params.mu_prime(), dm = params.d_edm();

    Matrix k2 = Matrix::Zero(n, n);
    for (int i = 0; i < 3; ++i) k2 += ks.pi[i] * ks.pi[i];
    k2 = 0.5 * (k2 + k2.adjoint().eval());

    auto eps_of = [mc2, c](double k) { return std::sqrt(mc2 * mc2 + c * c * k); };
    const Matrix eps = hermitian_function(k2, eps_of);
    const Matrix inv_eps = hermitian_function(k2, [&](double k) { return 1.0 / eps_of(k); });
    const Matrix rest_over_eps =
        hermitian_function(k2, [&](double k) { return mc2 / eps_of(k); });
    // Sandwich factor 1/sqrt(2 eps (eps + mc^2)), kept as a spectral function
    // of pi^2 exactly as in the closed-form expression.
    const Matrix xs = hermitian_function(k2, [&](double k) {
        const double e = eps_of(k);
        return 1.0 / std::sqrt(2.0 * e * (e + mc2));
    });

    const Matrix eye4 = Matrix4cd::Identity();
    Matrix ed[3], hd[3];
    for (int i = 0; i < 3; ++i) {
        ed[i] = diag_of(ks.Evec[i]);
        hd[i] = diag_of(ks.Hvec[i]);
    }

    // Symmetrized cross product (a x b - b x a)_k of operator-valued vectors.
    auto cross_sym = [](const Matrix a[3], const Matrix b[3], int k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        return Matrix(a[i] * b[j] - a[j] * b[i] + b[j] * a[i] - b[i] * a[j]);
    };

    Matrix h = kron_blocks(d.beta, eps) + kron_blocks(eye4, params.e * diag_of(ks.Phi));

    for (int i = 0; i < 3; ++i) {
        h -= mup * kron_blocks(d.Pi[i], hd[i]);
        h -= 0.5 * mu0 * kron_blocks(d.Pi[i], rest_over_eps * hd[i] + hd[i] * rest_over_eps);
        h -= dm * kron_blocks(d.Pi[i], ed[i]);
    }

    for (int k = 0; k < 3; ++k) {
        const Matrix cse = cross_sym(ks.pi.data(), ed, k);
        h += (mup * c / 4.0) * kron_blocks(d.Sigma[k], inv_eps * cse + cse * inv_eps);
        h += mu0 * params.m * c * c * c * kron_blocks(d.Sigma[k], xs * cse * xs);
        const Matrix csh = cross_sym(ks.pi.data(), hd, k);
        h -= (dm * c / 4.0) * kron_blocks(d.Sigma[k], inv_eps * csh + csh * inv_eps);
    }

    Matrix h_dot_pi = Matrix::Zero(n, n), e_dot_pi = Matrix::Zero(n, n);
    for (int i = 0; i < 3; ++i) {
        h_dot_pi += hd[i] * ks.pi[i] + ks.pi[i] * hd[i];
        e_dot_pi += ed[i] * ks.pi[i] + ks.pi[i] * ed[i];
    }
    for (int i = 0; i < 3; ++i) {
        const Matrix& p = ks.pi[i];
        h += (mup * c * c / 2.0) *
             kron_blocks(d.Pi[i], xs * (p * h_dot_pi + h_dot_pi * p) * xs);
        h += (dm * c * c / 2.0) *
             kron_blocks(d.Pi[i], xs * (p * e_dot_pi + e_dot_pi * p) * xs);
    }

    return {std::move(h), 4, scheme_tag(scheme)};
}

BlockOperator heisenberg_rhs(const BlockOperator& h_fw, const BlockOperator& observable,
                             const ParticleParams& params) {
    require_same_basis(h_fw, observable);
    return {(kI / params.hbar) *
                (h_fw.matrix * observable.matrix - observable.matrix * h_fw.matrix),
            h_fw.spinor_rank, h_fw.basis_tag};
}

}  // namespace fwt
