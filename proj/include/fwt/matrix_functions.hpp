#pragma once

#include <functional>

#include "fwt/block_operator.hpp"

namespace fwt {

// Principal square root. Hermitian input takes the eigendecomposition path;
// anything else goes through a complex Schur factorization with an explicit
// check that every eigenvalue lies in the open right half plane (otherwise
// the principal branch is undefined and SingularSqrt is thrown). All
// operands arising from the transforms are positive operators, so a failure
// here signals leaving the validity region, not a branch ambiguity.
Matrix operator_sqrt(const Matrix& a, double tol = 1e-12);

BlockOperator operator_sqrt(const BlockOperator& a, double tol = 1e-12);

// f applied to a hermitian matrix through its eigendecomposition. Used for
// spectral functions of pi^2 such as sqrt(m^2 c^4 + c^2 pi^2). clamp_floor
// snaps slightly negative eigenvalues (round-off from a PSD operand) to the
// floor before applying f.
Matrix hermitian_function(const Matrix& a, const std::function<double(double)>& f,
                          double clamp_floor = 0.0);

// x = a^-1 b and x = b a^-1 via LU solves against a single factorization;
// explicit inverses are avoided everywhere 1/T and 1/eps appear.
class LinearSolver {
public:
    explicit LinearSolver(const Matrix& a) : lu_(a) {}
    Matrix solve_left(const Matrix& b) const { return lu_.solve(b); }          // a^-1 b
    Matrix solve_right(const Matrix& b) const {                                 // b a^-1
        const Matrix xt = lu_.transpose().solve(b.transpose());
        return xt.transpose();
    }

private:
    Eigen::PartialPivLU<Matrix> lu_;
};

}  // namespace fwt
