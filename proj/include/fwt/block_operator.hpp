#pragma once

#include <Eigen/Dense>
#include <string>

#include "fwt/basis.hpp"
#include "fwt/errors.hpp"

namespace fwt {

// A finite matrix realization of an operator together with the grading
// metadata needed to split it into parts commuting (even) and anticommuting
// (odd) with beta. beta is always diag(+1 ... +1, -1 ... -1) in block order,
// upper spinor components first, i.e. kron(diag(1,..,-1,..), identity over
// the spatial basis).
struct BlockOperator {
    Matrix matrix;
    int spinor_rank = 4;  // 4 for spin-1/2, 2 for the two-component spinless form
    std::string basis_tag;

    int dim() const { return static_cast<int>(matrix.rows()); }
    int points() const { return dim() / spinor_rank; }

    void check_square() const {
        if (matrix.rows() != matrix.cols())
            throw InvalidBasis("BlockOperator: matrix not square");
        if (spinor_rank <= 0 || matrix.rows() % spinor_rank != 0)
            throw InvalidBasis("BlockOperator: dimension not a multiple of spinor rank");
    }
};

struct GradedParts {
    BlockOperator even;
    BlockOperator odd;
};

// Signature vector of beta for the operator's layout: +1 on the upper
// spinor-block rows, -1 on the lower.
RVector beta_signature(int dim, int spinor_rank);
Matrix beta_matrix(int dim, int spinor_rank);

// even = (A + beta A beta)/2, odd = (A - beta A beta)/2. Implemented with
// elementwise sign masks s_i s_j, so even + odd rebuilds A bitwise.
GradedParts grade_split(const BlockOperator& a);

BlockOperator commutator(const BlockOperator& a, const BlockOperator& b);
BlockOperator anticommutator(const BlockOperator& a, const BlockOperator& b);

// beta A^dagger beta.
BlockOperator pseudo_adjoint(const BlockOperator& a);

bool is_hermitian(const BlockOperator& a, double rel_tol = 1e-10);
bool is_pseudo_hermitian(const BlockOperator& a, double rel_tol = 1e-10);

double rel_norm(const Matrix& a, const Matrix& scale);

void require_same_basis(const BlockOperator& a, const BlockOperator& b);

}  // namespace fwt
