#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fwt/fw_transform.hpp"
#include "fwt/hamiltonians.hpp"
#include "fwt/matrix_functions.hpp"
#include "fwt/quantum_oracle.hpp"

using namespace fwt;

TEST_CASE("sign-function oracle is the identity on an already-diagonal problem") {
    // H = beta eps: lambda = beta, the bracket is the identity, U = 1.
    const int n = 5;
    Matrix h = Matrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = 1.0 + 0.1 * i;
        h(n + i, n + i) = -(1.0 + 0.1 * i);
    }
    const EriksenResult r = eriksen_fw(BlockOperator{h, 2, "t"});
    CHECK((r.U - Matrix::Identity(2 * n, 2 * n)).norm() <= 1e-12);
    CHECK((r.H_diag - h).norm() <= 1e-12);
    CHECK(r.offdiag_norm <= 1e-13);
}

TEST_CASE("sign-function oracle refuses a closing spectral gap") {
    Matrix h = Matrix::Zero(4, 4);
    h(0, 0) = 1.0;
    h(1, 1) = 1e-12;  // branch touching zero: sign undefined at scale
    h(2, 2) = -1.0;
    h(3, 3) = -1.0;
    CHECK_THROWS_AS(eriksen_fw(BlockOperator{h, 2, "t"}), GapClosure);
}

TEST_CASE("hermitian path: unitary, spectrum-preserving, block-diagonal") {
    ParticleParams params;
    params.hbar = 0.1;
    params.g = 2.3;
    const FieldConfiguration f = FieldConfiguration::sine_EB(0.08, 0.1, 20.0);
    const SpectralGrid grid(16, 20.0, 0.15, 0.0);
    const HamiltonianTriple t = build_dirac_pauli(f, params, Scheme(grid));
    const Matrix h = t.full();
    const EriksenResult r = eriksen_fw(BlockOperator{h, 4, t.M.basis_tag});

    const int dim = 64;
    CHECK((r.U * r.U.adjoint() - Matrix::Identity(dim, dim)).norm() <= 1e-10);
    CHECK((r.U_inv - r.U.adjoint()).norm() <= 1e-10);
    CHECK(r.offdiag_norm <= 1e-10);
    CHECK((r.U * h * r.U_inv - r.H_diag).norm() <= 1e-10 * h.norm());

    Eigen::SelfAdjointEigenSolver<Matrix> es_h(h);
    Eigen::SelfAdjointEigenSolver<Matrix> es_d(0.5 * (r.H_diag + r.H_diag.adjoint()));
    CHECK((es_h.eigenvalues() - es_d.eigenvalues()).norm() <=
          1e-9 * es_h.eigenvalues().norm());

    // The oracle and the transform pipeline block-diagonalize the same H;
    // their results differ by the pipeline's folded remainder, second order
    // in the odd residual.
    const FWResult fw = general_fw(t);
    const double resid = fw.residual_odd_norm * h.norm();
    CHECK((fw.H_fw - r.H_diag).norm() <= 20.0 * resid * resid / h.norm() + 1e-9);
}

TEST_CASE("pseudo-hermitian path: beta-unitary, block-diagonal, real spectrum") {
    ParticleParams params;
    params.hbar = 0.08;
    const FieldConfiguration f = FieldConfiguration::gaussian_well(0.4, 2.0, 10.0);
    const SpectralGrid grid(24, 20.0);
    const HamiltonianTriple t = build_feshbach_villars(f, params, Scheme(grid));
    const Matrix h = t.full();
    const BlockOperator hop{h, 2, t.M.basis_tag};
    CHECK(is_pseudo_hermitian(hop));
    const EriksenResult r = eriksen_fw(hop);

    const int dim = 48;
    const Matrix beta = t.beta();
    CHECK((r.U_inv * r.U - Matrix::Identity(dim, dim)).norm() <= 1e-9);
    // beta-unitarity rather than unitarity.
    CHECK((beta * r.U.adjoint() * beta - r.U_inv).norm() <= 1e-9 * r.U.norm());
    CHECK(r.offdiag_norm <= 1e-9);
    CHECK((r.U * h * r.U_inv - r.H_diag).norm() <= 1e-9 * h.norm());

    // Diagonalized and original spectra agree (both real up to round-off).
    Eigen::ComplexEigenSolver<Matrix> es_h(h), es_d(r.H_diag);
    Eigen::VectorXd wh = es_h.eigenvalues().real(), wd = es_d.eigenvalues().real();
    CHECK(es_h.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-9 * wh.cwiseAbs().maxCoeff());
    std::sort(wh.data(), wh.data() + dim);
    std::sort(wd.data(), wd.data() + dim);
    CHECK((wh - wd).norm() <= 1e-8 * wh.norm());
}

TEST_CASE("oracle rejects an input outside both hermiticity classes") {
    Matrix h(4, 4);
    h.setZero();
    h(0, 1) = Complex(0.3, 0.7);  // neither hermitian nor beta-pseudo-hermitian
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    h(2, 2) = -1.0;
    h(3, 3) = -2.0;
    CHECK_THROWS_AS(eriksen_fw(BlockOperator{h, 2, "t"}), Unsupported);
}

TEST_CASE("evolver conserves the norm matching the hermiticity class") {
    ParticleParams params;
    params.hbar = 0.1;

    // Spin-1/2 on a grid: standard norm conserved.
    const HamiltonianTriple dp =
        build_dirac_pauli(FieldConfiguration::gaussian_well(0.3, 2.0, 10.0), params,
                          Scheme(SpectralGrid(16, 20.0)));
    const SpectralGrid g16(16, 20.0);
    WavepacketState psi0;
    psi0.spinor_rank = 4;
    psi0.basis_tag = dp.M.basis_tag;
    psi0.psi = CVector::Zero(64);
    psi0.psi.head(16) = g16.packet(10.0, 0.2, 1.5, params.hbar);
    const BlockOperator dph{dp.full(), 4, dp.M.basis_tag};
    const WavepacketState psi1 = evolve(psi0, dph, params, 3.7);
    CHECK(psi1.norm_standard() == doctest::Approx(psi0.norm_standard()).epsilon(1e-10));
    CHECK((psi1.psi - psi0.psi).norm() > 0.1);  // actually moved

    // Two-component spinless: beta norm conserved, standard norm free to
    // drift.
    const HamiltonianTriple fv =
        build_feshbach_villars(FieldConfiguration::gaussian_well(0.3, 2.0, 10.0),
                               params, Scheme(g16));
    WavepacketState phi0;
    phi0.spinor_rank = 2;
    phi0.basis_tag = fv.M.basis_tag;
    phi0.psi = CVector::Zero(32);
    phi0.psi.head(16) = g16.packet(10.0, 0.2, 1.5, params.hbar);
    // Mix in a small lower component so the beta norm is nontrivial.
    phi0.psi.tail(16) = 0.2 * g16.packet(10.0, -0.1, 1.5, params.hbar);
    const BlockOperator fvh{fv.full(), 2, fv.M.basis_tag};
    const WavepacketState phi1 = evolve(phi0, fvh, params, 3.7);
    CHECK(phi1.norm_beta() == doctest::Approx(phi0.norm_beta()).epsilon(1e-9));

    // Composition property: evolving t then s equals t + s.
    const WavepacketState a = evolve(psi0, dph, params, 1.3);
    const WavepacketState b = evolve(a, dph, params, 2.4);
    CHECK((b.psi - psi1.psi).norm() <= 1e-10);
}

TEST_CASE("evolver dimension cap") {
    const int dim = 2056;
    Matrix h = Matrix::Identity(dim, dim);
    ParticleParams params;
    CHECK_THROWS_AS(Evolver(BlockOperator{h, 2, "t"}, params), Unsupported);
}

TEST_CASE("packet force balance on a coarse well") {
    // Positive-branch scalar Hamiltonian sqrt(m^2 c^4 + c^2 pi^2) + e Phi on
    // a small grid: the packet's momentum derivative tracks the classical
    // force within a few percent when the validity premise holds.
    // Carrier k0 = p0 / hbar plus the packet spread must stay inside the
    // band edge pi n / L, and the de Broglie length 2 pi hbar / p0 must stay
    // well under the well width: both sides of that squeeze set the grid.
    ParticleParams params;
    params.hbar = 0.02;
    const double depth = 0.2, width = 12.0, center = 30.0;
    const FieldConfiguration f = FieldConfiguration::gaussian_well(depth, width, center);
    const int n = 640;
    const SpectralGrid grid(n, 60.0);
    const double mc2 = params.mc2();

    Matrix k2;
    {
        const Matrix p = grid.momentum(params.hbar);
        k2 = p * p;
    }
    Matrix h = hermitian_function(
        k2, [&](double s) { return std::sqrt(mc2 * mc2 + params.c * params.c * s); });
    for (int i = 0; i < n; ++i) h(i, i) += params.e * f.Phi(Vec3(grid.x()[i], 0, 0));

    const CVector psi0 = grid.packet(15.6, 0.5, 2.0, params.hbar);
    const EhrenfestRecord rec = ehrenfest_check(psi0, BlockOperator{h, 1, grid.tag()},
                                                grid, f, params, 0.5, 0.25);
    CHECK(rec.flagged == false);
    CHECK(rec.validity.ok);
    CHECK(rec.validity.lambda_over_l <= 0.03);
    CHECK(rec.rel_deviation <= 0.08);
    CHECK(std::abs(rec.force_classical) > 1e-6);  // actually probing a slope
}
