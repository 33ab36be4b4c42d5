#pragma once

#include "tomo/types.hpp"

namespace tomo {

/// Euclidean projection of a real vector onto the probability simplex.
/// The input need not be sorted; the result is returned in the input's order.
RVector simplex_project(const RVector& values);

/// Euclidean (Frobenius) projection of a Hermitian operator onto the quantum
/// state space: eigenvalues are projected onto the simplex and the operator is
/// rebuilt in the same eigenbasis. Inputs with Hermiticity residual up to 1e-8
/// are symmetrized first; larger residuals are rejected.
/// When eigenvalues_out is non-null it receives the projected spectrum in
/// descending order.
Matrix project_to_states(const Matrix& h, RVector* eigenvalues_out = nullptr);

} // namespace tomo
