#include "fwt/quantum_oracle.hpp"

#include <cmath>
#include <limits>

#include "fwt/matrix_functions.hpp"
#include "fwt/semiclassical.hpp"

namespace fwt {

namespace {

// Radix-2 Parlett-Reinsch balancing followed by the complex eigensolver;
// eigenvectors are unscaled back and normalized. Used for the
// pseudo-hermitian (non-normal) matrices, where balancing measurably tightens
// the residual.
void general_eigendecomposition(const Matrix& a, CVector& eigs, Matrix& vecs) {
    const int n = static_cast<int>(a.rows());
    Matrix b = a;
    RVector scale = RVector::Ones(n);
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(b(j, i));
                r += std::abs(b(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < 0.5 * r) {
                c *= 2.0;
                r *= 0.5;
                f *= 2.0;
            }
            while (c >= 2.0 * r) {
                c *= 0.5;
                r *= 2.0;
                f *= 0.5;
            }
            if (c + r < 0.95 * s) {
                converged = false;
                scale[i] *= f;
                b.row(i) /= f;
                b.col(i) *= f;
            }
        }
    }
    Eigen::ComplexEigenSolver<Matrix> es(b);
    if (es.info() != Eigen::Success)
        throw Error("eigendecomposition of the evolution matrix failed");
    eigs = es.eigenvalues();
    vecs = es.eigenvectors();
    for (int i = 0; i < n; ++i) vecs.row(i) *= scale[i];
    for (int j = 0; j < n; ++j) vecs.col(j) /= vecs.col(j).norm();
}

void check_real_spectrum_and_residual(const Matrix& h, const CVector& eigs,
                                      const Matrix& vecs, double tol,
                                      const char* what) {
    const double scale = std::max(eigs.cwiseAbs().maxCoeff(), 1e-300);
    double max_imag = 0.0;
    for (int i = 0; i < eigs.size(); ++i)
        max_imag = std::max(max_imag, std::abs(eigs[i].imag()));
    if (max_imag > tol * scale)
        throw Error(std::string(what) +
                    ": spectrum is not real (max imaginary part " +
                    std::to_string(max_imag) + "); input is outside the "
                    "pseudo-hermitian validity region");
    const double resid = (h * vecs - vecs * eigs.asDiagonal()).norm() / h.norm();
    if (resid > tol)
        throw Error(std::string(what) + ": eigendecomposition residual " +
                    std::to_string(resid) + " exceeds tolerance");
}

Matrix kron_identity(int rank, const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    Matrix out = Matrix::Zero(rank * n, rank * n);
    for (int b = 0; b < rank; ++b) out.block(b * n, b * n, n, n) = a;
    return out;
}

}  // namespace

double WavepacketState::norm_beta() const {
    const RVector s = beta_signature(static_cast<int>(psi.size()), spinor_rank);
    Complex q(0.0, 0.0);
    for (int i = 0; i < psi.size(); ++i) q += std::conj(psi[i]) * s[i] * psi[i];
    return q.real();
}

EriksenResult eriksen_fw(const BlockOperator& h, const EriksenOptions& opts) {
    h.check_square();
    const int dim = h.dim();
    const Matrix beta = beta_matrix(dim, h.spinor_rank);
    const bool hermitian = is_hermitian(h);

    Matrix lambda;
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
        if (es.info() != Eigen::Success)
            throw Error("eigendecomposition of the Hamiltonian failed");
        const RVector& w = es.eigenvalues();
        const double top = std::max(std::abs(w[0]), std::abs(w[w.size() - 1]));
        const double gap = w.cwiseAbs().minCoeff();
        if (gap <= opts.gap_tol * top)
            throw GapClosure("upper and lower spectra are not separated: smallest "
                             "|eigenvalue| " + std::to_string(gap) + " against scale " +
                             std::to_string(top));
        RVector s(w.size());
        for (int i = 0; i < w.size(); ++i) s[i] = w[i] > 0.0 ? 1.0 : -1.0;
        lambda = es.eigenvectors() * s.cast<Complex>().asDiagonal() *
                 es.eigenvectors().adjoint();
    } else {
        if (!is_pseudo_hermitian(h))
            throw Unsupported("sign-function block diagonalization needs a hermitian "
                              "or pseudo-hermitian Hamiltonian");
        CVector eigs;
        Matrix vecs;
        general_eigendecomposition(h.matrix, eigs, vecs);
        check_real_spectrum_and_residual(h.matrix, eigs, vecs, opts.residual_tol,
                                         "sign-function block diagonalization");
        double top = 0.0, gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < eigs.size(); ++i) {
            top = std::max(top, std::abs(eigs[i].real()));
            gap = std::min(gap, std::abs(eigs[i].real()));
        }
        if (gap <= opts.gap_tol * top)
            throw GapClosure("upper and lower spectra are not separated: smallest "
                             "|eigenvalue| " + std::to_string(gap) + " against scale " +
                             std::to_string(top));
        CVector s(eigs.size());
        for (int i = 0; i < eigs.size(); ++i)
            s[i] = eigs[i].real() > 0.0 ? 1.0 : -1.0;
        Eigen::PartialPivLU<Matrix> lu(vecs);
        if (!(lu.rcond() > 1e-12))
            throw Error("sign-function block diagonalization: eigenvector basis is "
                        "numerically defective");
        // lambda = V sign V^-1 as a right solve against the factorization.
        const Matrix vst = lu.transpose().solve((vecs * s.asDiagonal()).transpose());
        lambda = vst.transpose();
    }

    // U = (1/2) (1 + beta lambda) B^(-1/2), B = 1 + (beta lambda + lambda beta - 2)/4.
    // B equals (beta + lambda)^2 / 4, so a spectrum check failure there is a
    // gap pathology, not a square-root branch problem.
    const Matrix one = Matrix::Identity(dim, dim);
    const Matrix b = one + 0.25 * (beta * lambda + lambda * beta - 2.0 * one);
    Matrix b_sqrt;
    try {
        b_sqrt = operator_sqrt(b);
    } catch (const SingularSqrt&) {
        throw GapClosure("sign-function block diagonalization: (beta + lambda)^2 is "
                         "singular, the two spectral branches touch");
    }
    Eigen::PartialPivLU<Matrix> lu_b(b_sqrt);
    if (!(lu_b.rcond() > 1e-14))
        throw GapClosure("sign-function block diagonalization: square-root factor is "
                         "numerically singular");

    EriksenResult r;
    const Matrix ut = lu_b.transpose().solve((one + beta * lambda).transpose());
    r.U = 0.5 * ut.transpose();
    r.U_inv = hermitian ? Matrix(r.U.adjoint()) : Matrix(beta * r.U.adjoint() * beta);
    if ((r.U * r.U_inv - one).norm() / std::sqrt(double(dim)) > 1e-8)
        throw Error("sign-function block diagonalization: transformation inverse "
                    "self-check failed");
    r.H_diag = r.U * h.matrix * r.U_inv;
    const BlockOperator hd{r.H_diag, h.spinor_rank, h.basis_tag};
    r.offdiag_norm = rel_norm(grade_split(hd).odd.matrix, r.H_diag);
    return r;
}

Evolver::Evolver(const BlockOperator& h, const ParticleParams& params) {
    h.check_square();
    params.validate();
    hbar_ = params.hbar;
    if (h.dim() > 2048)
        throw Unsupported("evolution basis dimension " + std::to_string(h.dim()) +
                          " exceeds the 2048 eigendecomposition cap");
    hermitian_ = is_hermitian(h);
    if (hermitian_) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
        if (es.info() != Eigen::Success)
            throw Error("eigendecomposition of the evolution matrix failed");
        eigs_ = es.eigenvalues();
        vecs_ = es.eigenvectors();
    } else {
        if (!is_pseudo_hermitian(h))
            throw Unsupported("evolution requires a hermitian or pseudo-hermitian "
                              "Hamiltonian");
        CVector eigs;
        general_eigendecomposition(h.matrix, eigs, vecs_);
        check_real_spectrum_and_residual(h.matrix, eigs, vecs_, 1e-8, "evolution");
        eigs_ = eigs.real();
        Eigen::PartialPivLU<Matrix> lu(vecs_);
        if (!(lu.rcond() > 1e-12))
            throw Error("evolution: eigenvector basis is numerically defective");
        vecs_inv_ = lu.solve(Matrix::Identity(h.dim(), h.dim()));
    }
}

CVector Evolver::apply(const CVector& psi, double t) const {
    if (psi.size() != vecs_.rows())
        throw InvalidBasis("evolution state dimension mismatch");
    CVector c = hermitian_ ? CVector(vecs_.adjoint() * psi) : CVector(vecs_inv_ * psi);
    for (int i = 0; i < c.size(); ++i)
        c[i] *= std::exp(Complex(0.0, -eigs_[i] * t / hbar_));
    return vecs_ * c;
}

WavepacketState evolve(const WavepacketState& psi0, const BlockOperator& h,
                       const ParticleParams& params, double t) {
    if (psi0.basis_tag != h.basis_tag || psi0.spinor_rank != h.spinor_rank)
        throw InvalidBasis("state and Hamiltonian live in different bases");
    Evolver ev(h, params);
    return {ev.apply(psi0.psi, t), psi0.spinor_rank, psi0.basis_tag};
}

EhrenfestRecord ehrenfest_check(const CVector& psi0, const BlockOperator& h_positive,
                                const SpectralGrid& grid,
                                const FieldConfiguration& fields,
                                const ParticleParams& params, double t, double dt) {
    if (!(dt > 0.0)) throw Error("ehrenfest_check: dt must be > 0");
    const int n = grid.n();
    const int rank = h_positive.spinor_rank;
    if (h_positive.dim() != rank * n)
        throw InvalidBasis("ehrenfest_check: Hamiltonian does not match the grid");

    Matrix x_op = Matrix::Zero(n, n);
    x_op.diagonal() = grid.x().cast<Complex>();
    RVector ax(n);
    for (int j = 0; j < n; ++j) ax[j] = fields.A(Vec3(grid.x()[j], 0.0, 0.0)).x();
    Matrix pi_op = grid.momentum(params.hbar) -
                   (params.e / params.c) * Matrix(ax.cast<Complex>().asDiagonal());
    const Matrix x_full = kron_identity(rank, x_op);
    const Matrix pi_full = kron_identity(rank, pi_op);

    Evolver ev(h_positive, params);
    auto mean = [](const Matrix& op, const CVector& psi) {
        const double nn = psi.squaredNorm();
        return (psi.adjoint() * op * psi)(0, 0).real() / nn;
    };

    const CVector psi_m = ev.apply(psi0, t - dt);
    const CVector psi_c = ev.apply(psi0, t);
    const CVector psi_p = ev.apply(psi0, t + dt);

    EhrenfestRecord rec;
    rec.t = t;
    rec.x_mean = mean(x_full, psi_c);
    rec.pi_mean = mean(pi_full, psi_c);
    rec.dpi_dt_quantum = (mean(pi_full, psi_p) - mean(pi_full, psi_m)) / (2.0 * dt);

    PhaseSpinState s;
    s.r = Vec3(rec.x_mean, 0.0, 0.0);
    s.pi = Vec3(rec.pi_mean, grid.py(), grid.pz());
    rec.force_classical = rhs_scalar(s, fields, params).x();
    const double scale = std::max(std::abs(rec.force_classical), 1e-300);
    rec.rel_deviation = std::abs(rec.dpi_dt_quantum - rec.force_classical) / scale;

    rec.validity = validity_report(s, fields, params);
    rec.flagged = !rec.validity.ok;
    return rec;
}

}  // namespace fwt
