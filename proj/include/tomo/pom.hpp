#pragma once

#include "tomo/types.hpp"

#include <vector>

namespace tomo {

/// Probability-operator measurement: K PSD elements summing to the identity.
struct Pom {
    Index dim = 0;
    std::vector<Matrix> elements;

    Index size() const { return static_cast<Index>(elements.size()); }
};

struct PomReport {
    double completeness_residual;   // max-abs of (sum of elements - 1)
    double min_eigenvalue;          // over all elements
    double hermiticity_residual;    // max over elements
    bool ok(double tol = 1e-10) const {
        return completeness_residual <= tol && min_eigenvalue >= -tol &&
               hermiticity_residual <= tol;
    }
};
PomReport validate_pom(const Pom& pom);

/// Single-qubit six-outcome Pauli POM, elements ordered (z+, z-, x+, x-, y+, y-),
/// each eigenprojector weighted 1/3.
Pom pauli6_register();

/// Single-qubit tetrahedron POM, elements (1 + a_k.sigma)/4 for the four
/// tetrahedral Bloch vectors (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1), all /sqrt(3).
Pom tetrahedron_register();

/// Group-covariant SIC candidate from a fiducial: elements |psi_jl><psi_jl|/d
/// with |psi_jl> = X^j Z^l |fiducial>. Rejects fiducials whose pairwise
/// overlaps deviate from 1/(d+1) by more than tol.
struct SicReport {
    double overlap_residual;   // max |  |<a|b>|^2 - 1/(d+1) |  over a != b
};
Pom sic_from_fiducial(const CVector& fiducial, double tol = 1e-6,
                      SicReport* report = nullptr);

/// Product POM over n same-dimension registers. Registers may differ in
/// element count and content. Outcome flattening puts register 1 in the most
/// significant position: k = sum_a k_a * stride_a with stride_a the product
/// of the K of all later registers.
struct ProductPom {
    std::vector<Pom> registers;

    int n() const { return static_cast<int>(registers.size()); }
    Index register_dim() const { return registers.front().dim; }
    Index dim() const;
    Index num_outcomes() const;
    std::vector<Index> strides() const;
    Index flatten(const std::vector<Index>& digits) const;
    std::vector<Index> unflatten(Index k) const;
};

ProductPom product_pom(const Pom& reg, int n);
ProductPom product_pom(std::vector<Pom> registers);

Matrix kron(const Matrix& a, const Matrix& b);

/// Element k of the flattened product POM, built on the fly.
Matrix product_element(const ProductPom& pom, Index k);

/// Dense Kronecker expansion in flattened order. Intended for small n.
Pom materialize(const ProductPom& pom);

} // namespace tomo
