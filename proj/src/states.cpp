#include "tomo/states.hpp"

#include "tomo/random.hpp"

#include <cmath>
#include <stdexcept>

namespace tomo {

EigenSystem eigh_descending(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigendecomposition failed");
    }
    const Index d = h.rows();
    EigenSystem out;
    out.values = solver.eigenvalues().reverse();
    out.vectors.resize(d, d);
    for (Index i = 0; i < d; ++i) {
        out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    return out;
}

CVector haar_random_pure(Index d, std::uint64_t seed) {
    if (d < 1) {
        throw std::invalid_argument("haar_random_pure: dimension must be >= 1");
    }
    Rng rng(seed);
    CVector psi(d);
    for (Index i = 0; i < d; ++i) {
        double re = rng.normal();
        double im = rng.normal();
        psi(i) = Cplx(re, im);
    }
    psi.normalize();
    return psi;
}

CVector w_state(int n) {
    if (n < 1) {
        throw std::invalid_argument("w_state: register count must be >= 1");
    }
    const Index d = Index{1} << n;
    CVector psi = CVector::Zero(d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (int q = 0; q < n; ++q) {
        psi(Index{1} << q) = amp;
    }
    return psi;
}

CVector ghz_state(int n) {
    if (n < 1) {
        throw std::invalid_argument("ghz_state: register count must be >= 1");
    }
    const Index d = Index{1} << n;
    CVector psi = CVector::Zero(d);
    psi(0) = M_SQRT1_2;
    psi(d - 1) = M_SQRT1_2;
    return psi;
}

Matrix pure_to_density(const CVector& psi) {
    return psi * psi.adjoint();
}

Matrix add_white_noise(const Matrix& rho, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("add_white_noise: eps must be in [0, 1]");
    }
    const Index d = rho.rows();
    return (1.0 - eps) * rho + eps * maximally_mixed(d);
}

Matrix sqrt_psd(const Matrix& m) {
    EigenSystem es = eigh_descending(m);
    RVector roots = es.values.cwiseMax(0.0).cwiseSqrt();
    return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

StateDistance state_distance(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("state_distance: dimension mismatch");
    }
    StateDistance out;
    EigenSystem diff = eigh_descending(rho - sigma);
    out.trace_distance = 0.5 * diff.values.cwiseAbs().sum();

    Matrix root = sqrt_psd(rho);
    EigenSystem inner = eigh_descending(root * sigma * root);
    double tr = inner.values.cwiseMax(0.0).cwiseSqrt().sum();
    out.fidelity = tr * tr;
    return out;
}

DensityCheck check_density(const Matrix& rho) {
    DensityCheck out;
    out.hermiticity_residual = hermiticity_residual(rho);
    out.trace_error = std::abs(rho.trace().real() - 1.0) +
                      std::abs(rho.trace().imag());
    out.min_eigenvalue = eigh_descending(symmetrized(rho)).values.minCoeff();
    return out;
}

} // namespace tomo
