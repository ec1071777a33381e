#include "fwt/matrix_functions.hpp"

#include <algorithm>
#include <unsupported/Eigen/MatrixFunctions>

namespace fwt {

namespace {

bool matrix_is_hermitian(const Matrix& a, double tol) {
    return rel_norm(a - a.adjoint(), a) <= tol;
}

}  // namespace

Matrix operator_sqrt(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) throw InvalidBasis("operator_sqrt: matrix not square");
    const double scale = a.norm();
    if (matrix_is_hermitian(a, 1e-12)) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        if (es.info() != Eigen::Success)
            throw SingularSqrt("operator_sqrt: eigendecomposition failed");
        const auto& w = es.eigenvalues();
        if (w.minCoeff() <= -tol * scale)
            throw SingularSqrt("operator_sqrt: eigenvalue with non-positive real part (" +
                               std::to_string(w.minCoeff()) + ")");
        Eigen::VectorXd r = w.cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().adjoint();
    }
    Eigen::ComplexSchur<Matrix> schur(a);
    if (schur.info() != Eigen::Success)
        throw SingularSqrt("operator_sqrt: Schur decomposition failed");
    const Matrix& t = schur.matrixT();
    for (int i = 0; i < t.rows(); ++i)
        if (t(i, i).real() <= tol * scale)
            throw SingularSqrt("operator_sqrt: eigenvalue with non-positive real part");
    // matrix_sqrt_triangular writes only the upper triangle; the rest must
    // already be zero.
    Matrix sqrt_t = Matrix::Zero(t.rows(), t.cols());
    Eigen::matrix_sqrt_triangular(t, sqrt_t);
    return schur.matrixU() * sqrt_t * schur.matrixU().adjoint();
}

BlockOperator operator_sqrt(const BlockOperator& a, double tol) {
    return {operator_sqrt(a.matrix, tol), a.spinor_rank, a.basis_tag};
}

Matrix hermitian_function(const Matrix& a, const std::function<double(double)>& f,
                          double clamp_floor) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
    if (es.info() != Eigen::Success)
        throw Error("hermitian_function: eigendecomposition failed");
    Eigen::VectorXd w = es.eigenvalues();
    // Snap only round-off stragglers just below the floor; eigenvalues
    // genuinely beneath it are the caller's business and pass through to f.
    const double snap =
        1e-12 * std::max(1.0, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
    for (int i = 0; i < w.size(); ++i)
        if (w[i] < clamp_floor && w[i] > clamp_floor - snap) w[i] = clamp_floor;
    for (int i = 0; i < w.size(); ++i) w[i] = f(w[i]);
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace fwt
