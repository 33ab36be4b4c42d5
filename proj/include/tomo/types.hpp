#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace tomo {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Max-abs residual of M against its adjoint.
inline double hermiticity_residual(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

/// Re tr(A†B). Coincides with tr(AB) when both arguments are Hermitian.
inline double real_inner(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b.conjugate()).sum().real();
}

inline Matrix maximally_mixed(Index d) {
    return Matrix::Identity(d, d) / static_cast<double>(d);
}

struct EigenSystem {
    RVector values;   // descending
    Matrix vectors;   // columns match values
};

/// Dense Hermitian eigendecomposition, eigenvalues in descending order.
EigenSystem eigh_descending(const Matrix& h);

} // namespace tomo
