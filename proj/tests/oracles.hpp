#pragma once

// Test-only oracles, deliberately independent of the library's projection and
// gradient code paths: Dykstra alternating projections, a closed-form Bloch
// solution for qubits, zooming grid search on the simplex, and a chi-square
// tail for sampling sanity checks.

#include "tomo/random.hpp"
#include "tomo/states.hpp"
#include "tomo/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracles {

using tomo::Cplx;
using tomo::Index;
using tomo::Matrix;
using tomo::RVector;

inline Matrix random_hermitian(tomo::Rng& rng, Index d) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            g(i, j) = Cplx(rng.normal(), rng.normal());
        }
    }
    return 0.5 * (g + g.adjoint());
}

inline Matrix random_density(tomo::Rng& rng, Index d, double floor = 0.0) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            g(i, j) = Cplx(rng.normal(), rng.normal());
        }
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    if (floor > 0.0) {
        rho = (1.0 - floor) * rho + floor * tomo::maximally_mixed(d);
    }
    return tomo::symmetrized(rho);
}

inline Matrix random_unitary(tomo::Rng& rng, Index d) {
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            g(i, j) = Cplx(rng.normal(), rng.normal());
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < d; ++i) {
        const Cplx diag = r(i, i);
        q.col(i) *= (std::abs(diag) > 0.0) ? diag / std::abs(diag) : Cplx(1, 0);
    }
    return q;
}

inline Matrix traceless_direction(tomo::Rng& rng, Index d) {
    Matrix h = random_hermitian(rng, d);
    h -= (h.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
    return h / h.norm();
}

// Dykstra's alternating projections between the PSD cone and the trace-one
// affine plane; converges to the Frobenius-nearest state.
inline Matrix dykstra_nearest_state(const Matrix& h, int max_rounds = 20000,
                                    double tol = 1e-11) {
    const Index d = h.rows();
    const Matrix id = Matrix::Identity(d, d);
    Matrix x = tomo::symmetrized(h);
    Matrix p = Matrix::Zero(d, d);
    Matrix q = Matrix::Zero(d, d);
    for (int round = 0; round < max_rounds; ++round) {
        const tomo::EigenSystem es = tomo::eigh_descending(x + p);
        const RVector clipped = es.values.cwiseMax(0.0);
        const Matrix y = es.vectors * clipped.asDiagonal() * es.vectors.adjoint();
        p = x + p - y;
        const Matrix yq = y + q;
        const Matrix x_new = yq - ((yq.trace().real() - 1.0) /
                                   static_cast<double>(d)) * id;
        q = yq - x_new;
        const double gap = (x_new - y).norm();
        x = x_new;
        if (gap <= tol) break;
    }
    return x;
}

// Exact qubit answer in the Pauli basis: project the Bloch vector of the
// trace-normalized part onto the unit ball.
inline double bloch_nearest_distance(const Matrix& h) {
    const double h0 = 0.5 * h.trace().real();
    const double hx = h(1, 0).real();
    const double hy = h(1, 0).imag();
    const double hz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    double rx = 2.0 * hx, ry = 2.0 * hy, rz = 2.0 * hz;
    const double len = std::sqrt(rx * rx + ry * ry + rz * rz);
    if (len > 1.0) {
        rx /= len;
        ry /= len;
        rz /= len;
    }
    const double dx = hx - 0.5 * rx;
    const double dy = hy - 0.5 * ry;
    const double dz = hz - 0.5 * rz;
    return std::sqrt(2.0 * (h0 - 0.5) * (h0 - 0.5) +
                     2.0 * (dx * dx + dy * dy + dz * dz));
}

// Zooming grid search for the nearest simplex point, dimensions 2 and 3.
inline RVector simplex_grid_nearest(const RVector& target) {
    const Index d = target.size();
    auto dist2 = [&](const RVector& x) { return (x - target).squaredNorm(); };
    RVector best(d);
    best.setConstant(1.0 / static_cast<double>(d));
    double best_d2 = dist2(best);

    if (d == 2) {
        double lo = 0.0, hi = 1.0;
        for (int zoom = 0; zoom < 8; ++zoom) {
            const double step = (hi - lo) / 64.0;
            double local_best = best(0);
            for (double s = lo; s <= hi + 1e-15; s += step) {
                RVector x(2);
                x << s, 1.0 - s;
                if (dist2(x) < best_d2) {
                    best_d2 = dist2(x);
                    best = x;
                    local_best = s;
                }
            }
            lo = std::max(0.0, local_best - 2.0 * step);
            hi = std::min(1.0, local_best + 2.0 * step);
        }
        return best;
    }

    double lo0 = 0.0, hi0 = 1.0, lo1 = 0.0, hi1 = 1.0;
    for (int zoom = 0; zoom < 10; ++zoom) {
        const double step0 = (hi0 - lo0) / 40.0;
        const double step1 = (hi1 - lo1) / 40.0;
        double b0 = best(0), b1 = best(1);
        for (double s = lo0; s <= hi0 + 1e-15; s += step0) {
            for (double t = lo1; t <= hi1 + 1e-15; t += step1) {
                if (s + t > 1.0) continue;
                RVector x(3);
                x << s, t, 1.0 - s - t;
                if (dist2(x) < best_d2) {
                    best_d2 = dist2(x);
                    best = x;
                    b0 = s;
                    b1 = t;
                }
            }
        }
        lo0 = std::max(0.0, b0 - 2.0 * step0);
        hi0 = std::min(1.0, b0 + 2.0 * step0);
        lo1 = std::max(0.0, b1 - 2.0 * step1);
        hi1 = std::min(1.0, b1 + 2.0 * step1);
    }
    return best;
}

// Regularized incomplete gamma Q(a, x); chi-square tail is Q(df/2, x/2).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a;
    double c = 1e300;
    double dd = 1.0 / b;
    double h = dd;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::abs(dd) < 1e-300) dd = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        dd = 1.0 / dd;
        const double del = dd * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - gln);
}

inline double chi_square_pvalue(double statistic, int dof) {
    return gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

} // namespace oracles
