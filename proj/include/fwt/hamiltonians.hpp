#pragma once

#include <array>

#include "fwt/basis.hpp"
#include "fwt/block_operator.hpp"
#include "fwt/fields.hpp"
#include "fwt/particle.hpp"

namespace fwt {

// Standard-representation constant matrices. beta = diag(1,1,-1,-1);
// alpha_i antidiagonal sigma blocks; gamma_i = beta alpha_i; Sigma_i =
// diag(sigma_i, sigma_i); Pi_i = beta Sigma_i. rho_i are the Pauli matrices
// acting on the two-component spinless space.
struct DiracMatrices {
    Eigen::Matrix4cd beta;
    std::array<Eigen::Matrix4cd, 3> alpha, gamma, Sigma, Pi;
};
const DiracMatrices& dirac_matrices();
const std::array<Eigen::Matrix2cd, 3>& rho_matrices();

// One Hamiltonian split H = beta*M + E + O. M and E are even, O is odd;
// every builder's output satisfies this by construction and the tests verify
// it through grade_split.
struct HamiltonianTriple {
    BlockOperator M, E, O;
    Matrix beta() const { return beta_matrix(M.dim(), M.spinor_rank); }
    Matrix full() const { return beta() * M.matrix + E.matrix + O.matrix; }
};

// Kinetic momentum component matrices pi_i = p_i - (e/c) A_i over the
// spatial basis (n x n for a grid, 1 x 1 for a momentum block), plus sampled
// field values. The grid supports fields varying along x only.
struct KineticStructure {
    std::array<Matrix, 3> pi;
    RVector Phi;                  // per spatial point
    std::array<RVector, 3> Evec;  // strengths per spatial point
    std::array<RVector, 3> Hvec;
    int points = 0;
};
KineticStructure kinetic_structure(const FieldConfiguration& fields,
                                   const ParticleParams& params, const Scheme& scheme);

// Spin-1/2 Hamiltonian with anomalous-magnetic-moment and electric-dipole
// couplings: M = mc^2, E = e Phi - mu' Pi.H - d Pi.E,
// O = c alpha.pi + i mu' gamma.E - i d gamma.H.
HamiltonianTriple build_dirac_pauli(const FieldConfiguration& fields,
                                    const ParticleParams& params, const Scheme& scheme);

// Two-component spinless Hamiltonian: M = mc^2 + pi^2/2m, E = e Phi,
// O = i rho_2 pi^2/2m. [M, O] = 0 identically; the full H is
// beta-pseudo-hermitian rather than hermitian.
HamiltonianTriple build_feshbach_villars(const FieldConfiguration& fields,
                                         const ParticleParams& params, const Scheme& scheme);

// Closed-form block-diagonal spin-1/2 Hamiltonian, first order in hbar:
// beta eps' + e Phi plus the magnetic-moment, spin-orbit and dipole terms,
// eps' = sqrt(m^2 c^4 + c^2 pi^2), with symmetrized operator orderings and
// 1/sqrt(2 eps'(eps'+mc^2)) sandwiches kept verbatim. Used as the
// independent target the transform output is compared against.
BlockOperator eval_fw_spin_half_analytic(const FieldConfiguration& fields,
                                         const ParticleParams& params,
                                         const Scheme& scheme);

// (i/hbar) [H, observable]; fields here are static so the -(e/c) dA/dt term
// of the full momentum equation is identically zero.
BlockOperator heisenberg_rhs(const BlockOperator& h_fw, const BlockOperator& observable,
                             const ParticleParams& params);

}  // namespace fwt
