#include "tomo/projection.hpp"

#include "tomo/states.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tomo {

namespace {

// values sorted descending; returns max{lambda - w, 0} with the usual
// threshold w = (sum_{i<=u} lambda_i - 1)/u, u the largest feasible pivot.
RVector simplex_project_sorted(const RVector& values) {
    const Index d = values.size();
    double running = 0.0;
    double shift = 0.0;
    for (Index j = 0; j < d; ++j) {
        running += values(j);
        const double w = (running - 1.0) / static_cast<double>(j + 1);
        if (values(j) - w > 0.0) {
            shift = w;   // j+1 remains a feasible pivot; keep the largest
        }
    }
    return (values.array() - shift).max(0.0);
}

} // namespace

RVector simplex_project(const RVector& values) {
    const Index d = values.size();
    if (d == 0) {
        throw std::invalid_argument("simplex_project: empty vector");
    }
    bool sorted = true;
    for (Index i = 0; i + 1 < d; ++i) {
        if (values(i) < values(i + 1)) {
            sorted = false;
            break;
        }
    }
    if (sorted) {
        return simplex_project_sorted(values);
    }
    std::vector<Index> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return values(a) > values(b); });
    RVector desc(d);
    for (Index i = 0; i < d; ++i) desc(i) = values(order[static_cast<size_t>(i)]);
    RVector projected = simplex_project_sorted(desc);
    RVector out(d);
    for (Index i = 0; i < d; ++i) out(order[static_cast<size_t>(i)]) = projected(i);
    return out;
}

Matrix project_to_states(const Matrix& h, RVector* eigenvalues_out) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw std::invalid_argument("project_to_states: input must be square");
    }
    const double residual = hermiticity_residual(h);
    if (residual > 1e-8) {
        throw std::invalid_argument(
            "project_to_states: input is not Hermitian (residual " +
            std::to_string(residual) + ")");
    }
    const EigenSystem es = eigh_descending(residual > 0.0 ? symmetrized(h) : h);
    const RVector bar = simplex_project_sorted(es.values);
    if (eigenvalues_out != nullptr) {
        *eigenvalues_out = bar;
    }
    return es.vectors * bar.asDiagonal() * es.vectors.adjoint();
}

} // namespace tomo
