#pragma once

#include <optional>

#include "fwt/block_operator.hpp"
#include "fwt/fields.hpp"
#include "fwt/particle.hpp"
#include "fwt/semiclassical.hpp"

namespace fwt {

// Wavefunction over the discretization basis. Spin-1/2 states carry the
// standard norm psi*psi; the two-component spinless form is normalized with
// the beta weight psi* beta psi (positive for upper-dominated states).
struct WavepacketState {
    CVector psi;
    int spinor_rank = 4;
    std::string basis_tag;

    double norm_standard() const { return psi.norm(); }
    double norm_beta() const;
};

struct EriksenResult {
    Matrix U, U_inv, H_diag;
    double offdiag_norm = 0.0;  // odd-block content of H_diag, relative
};

struct EriksenOptions {
    double gap_tol = 1e-8;        // relative to ||H||; smaller gap -> GapClosure
    double residual_tol = 1e-8;   // nonhermitian path: eigendecomposition residual
};

// One-step exact block-diagonalization built from the sign function
// lambda = H / sqrt(H^2):
//   U = (1/2) (1 + beta lambda) [1 + (beta lambda + lambda beta - 2)/4]^(-1/2).
// The bracket equals (beta + lambda)^2 / 4, commutes with beta lambda, and
// has right-half-plane spectrum whenever the gap condition holds. Hermitian
// H goes through a real eigendecomposition; the pseudo-hermitian case uses
// the balanced unsymmetric solver with explicit residual and
// spectrum-reality checks. Entirely independent of the transform pipeline:
// this is the oracle the pipeline is judged against.
EriksenResult eriksen_fw(const BlockOperator& h, const EriksenOptions& opts = {});

// Exact evolution exp(-i H t / hbar) psi via eigendecomposition, unitary or
// pseudo-unitary according to the hermiticity class of H. Dimension capped
// at 2048 (Unsupported beyond); decompose once, apply many.
class Evolver {
public:
    Evolver(const BlockOperator& h, const ParticleParams& params);
    CVector apply(const CVector& psi, double t) const;
    bool hermitian() const { return hermitian_; }

private:
    bool hermitian_;
    double hbar_;
    Eigen::VectorXd eigs_;
    Matrix vecs_, vecs_inv_;  // vecs_inv_ empty on the hermitian path
};

WavepacketState evolve(const WavepacketState& psi0, const BlockOperator& h,
                       const ParticleParams& params, double t);

struct EhrenfestRecord {
    double t = 0.0;
    double x_mean = 0.0, pi_mean = 0.0;
    double dpi_dt_quantum = 0.0;   // centered difference of <pi_x>
    double force_classical = 0.0;  // classical RHS at (<r>, <pi>)
    double rel_deviation = 0.0;
    ValidityReport validity;
    bool flagged = false;  // validity violated; comparison not meaningful
};

// The correspondence check: evolve a packet under a block-diagonal
// Hamiltonian over the grid, differentiate <pi_x> numerically, and compare
// with the classical force at the packet's mean phase-space point. dt is the
// half-width of the centered difference.
EhrenfestRecord ehrenfest_check(const CVector& psi0, const BlockOperator& h_positive,
                                const SpectralGrid& grid,
                                const FieldConfiguration& fields,
                                const ParticleParams& params, double t, double dt);

}  // namespace fwt
