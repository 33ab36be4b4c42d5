#pragma once

#include "tomo/types.hpp"

#include <cstdint>

namespace tomo {

/// Haar-random pure state of dimension d: a vector of independent standard
/// complex Gaussians, normalized. Identical (d, seed) gives identical output.
CVector haar_random_pure(Index d, std::uint64_t seed);

/// n-qubit W state: equal superposition of the weight-one basis states.
CVector w_state(int n);

/// n-qubit GHZ state: (|0...0> + |1...1>)/sqrt(2).
CVector ghz_state(int n);

Matrix pure_to_density(const CVector& psi);

/// Depolarizing mixture (1 - eps) * rho + eps * 1/d.
Matrix add_white_noise(const Matrix& rho, double eps);

struct StateDistance {
    double trace_distance;   // 0.5 * ||rho - sigma||_1
    double fidelity;         // (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
};
StateDistance state_distance(const Matrix& rho, const Matrix& sigma);

struct DensityCheck {
    double hermiticity_residual;
    double trace_error;       // |tr - 1|
    double min_eigenvalue;
    bool ok() const {
        return hermiticity_residual <= 1e-12 && trace_error <= 1e-10 &&
               min_eigenvalue >= -1e-10;
    }
};
DensityCheck check_density(const Matrix& rho);

/// Principal square root of a PSD Hermitian matrix. Eigenvalues slightly
/// negative from round-off are clamped to zero.
Matrix sqrt_psd(const Matrix& m);

} // namespace tomo
