#include "fwt/block_operator.hpp"

namespace fwt {

RVector beta_signature(int dim, int spinor_rank) {
    if (spinor_rank <= 0 || dim % spinor_rank != 0)
        throw InvalidBasis("beta_signature: dimension not a multiple of spinor rank");
    const int n = dim / spinor_rank;
    RVector s(dim);
    for (int b = 0; b < spinor_rank; ++b)
        s.segment(b * n, n).setConstant(b < spinor_rank / 2 ? 1.0 : -1.0);
    return s;
}

Matrix beta_matrix(int dim, int spinor_rank) {
    return beta_signature(dim, spinor_rank).cast<Complex>().asDiagonal();
}

GradedParts grade_split(const BlockOperator& a) {
    a.check_square();
    const RVector s = beta_signature(a.dim(), a.spinor_rank);
    BlockOperator even{Matrix(a.dim(), a.dim()), a.spinor_rank, a.basis_tag};
    BlockOperator odd{Matrix(a.dim(), a.dim()), a.spinor_rank, a.basis_tag};
    // s_i s_j = +1 selects the beta-commuting entries; the mask split is
    // exact, so even + odd reproduces a bit for bit.
    for (int j = 0; j < a.dim(); ++j) {
        for (int i = 0; i < a.dim(); ++i) {
            if (s[i] * s[j] > 0.0) {
                even.matrix(i, j) = a.matrix(i, j);
                odd.matrix(i, j) = Complex(0.0, 0.0);
            } else {
                even.matrix(i, j) = Complex(0.0, 0.0);
                odd.matrix(i, j) = a.matrix(i, j);
            }
        }
    }
    return {std::move(even), std::move(odd)};
}

void require_same_basis(const BlockOperator& a, const BlockOperator& b) {
    if (a.basis_tag != b.basis_tag || a.spinor_rank != b.spinor_rank ||
        a.dim() != b.dim())
        throw InvalidBasis("operands live in different bases: '" + a.basis_tag +
                           "' vs '" + b.basis_tag + "'");
}

BlockOperator commutator(const BlockOperator& a, const BlockOperator& b) {
    require_same_basis(a, b);
    return {a.matrix * b.matrix - b.matrix * a.matrix, a.spinor_rank, a.basis_tag};
}

BlockOperator anticommutator(const BlockOperator& a, const BlockOperator& b) {
    require_same_basis(a, b);
    return {a.matrix * b.matrix + b.matrix * a.matrix, a.spinor_rank, a.basis_tag};
}

BlockOperator pseudo_adjoint(const BlockOperator& a) {
    a.check_square();
    const RVector s = beta_signature(a.dim(), a.spinor_rank);
    Matrix out = a.matrix.adjoint();
    for (int j = 0; j < a.dim(); ++j)
        for (int i = 0; i < a.dim(); ++i) out(i, j) *= s[i] * s[j];
    return {std::move(out), a.spinor_rank, a.basis_tag};
}

double rel_norm(const Matrix& a, const Matrix& scale) {
    const double s = scale.norm();
    return s > 0.0 ? a.norm() / s : a.norm();
}

bool is_hermitian(const BlockOperator& a, double rel_tol) {
    a.check_square();
    return rel_norm(a.matrix - a.matrix.adjoint(), a.matrix) <= rel_tol;
}

bool is_pseudo_hermitian(const BlockOperator& a, double rel_tol) {
    return rel_norm(a.matrix - pseudo_adjoint(a).matrix, a.matrix) <= rel_tol;
}

}  // namespace fwt
