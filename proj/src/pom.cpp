#include "tomo/pom.hpp"

#include "tomo/states.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tomo {

PomReport validate_pom(const Pom& pom) {
    PomReport out{0.0, 0.0, 0.0};
    Matrix sum = Matrix::Zero(pom.dim, pom.dim);
    bool first = true;
    for (const Matrix& e : pom.elements) {
        if (e.rows() != pom.dim || e.cols() != pom.dim) {
            throw std::invalid_argument("validate_pom: element dimension mismatch");
        }
        sum += e;
        out.hermiticity_residual =
            std::max(out.hermiticity_residual, hermiticity_residual(e));
        double lo = eigh_descending(symmetrized(e)).values.minCoeff();
        out.min_eigenvalue = first ? lo : std::min(out.min_eigenvalue, lo);
        first = false;
    }
    out.completeness_residual =
        (sum - Matrix::Identity(pom.dim, pom.dim)).cwiseAbs().maxCoeff();
    return out;
}

namespace {

Matrix bloch_projector(double x, double y, double z) {
    Matrix p(2, 2);
    p << Cplx(1.0 + z, 0.0), Cplx(x, -y),
         Cplx(x, y),         Cplx(1.0 - z, 0.0);
    return 0.5 * p;
}

} // namespace

Pom pauli6_register() {
    Pom pom;
    pom.dim = 2;
    pom.elements = {
        bloch_projector(0, 0, 1) / 3.0,  bloch_projector(0, 0, -1) / 3.0,
        bloch_projector(1, 0, 0) / 3.0,  bloch_projector(-1, 0, 0) / 3.0,
        bloch_projector(0, 1, 0) / 3.0,  bloch_projector(0, -1, 0) / 3.0,
    };
    return pom;
}

Pom tetrahedron_register() {
    const double s = 1.0 / std::sqrt(3.0);
    const double axes[4][3] = {
        {s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    Pom pom;
    pom.dim = 2;
    for (const auto& a : axes) {
        // (1 + a.sigma)/4 = bloch projector / 2
        pom.elements.push_back(0.5 * bloch_projector(a[0], a[1], a[2]));
    }
    return pom;
}

Pom sic_from_fiducial(const CVector& fiducial, double tol, SicReport* report) {
    const Index d = fiducial.size();
    if (d < 2) {
        throw std::invalid_argument("sic_from_fiducial: dimension must be >= 2");
    }
    if (std::abs(fiducial.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("sic_from_fiducial: fiducial must be unit norm");
    }

    // Clock-and-shift orbit
    std::vector<CVector> orbit;
    orbit.reserve(d * d);
    const double w = 2.0 * M_PI / static_cast<double>(d);
    for (Index j = 0; j < d; ++j) {
        for (Index l = 0; l < d; ++l) {
            CVector v(d);
            for (Index m = 0; m < d; ++m) {
                // (X^j Z^l psi)_m = omega^{l (m - j)} psi_{m - j}
                Index src = (m - j + d) % d;
                double phase = w * static_cast<double>(l) * static_cast<double>(src);
                v(m) = std::polar(1.0, phase) * fiducial(src);
            }
            orbit.push_back(std::move(v));
        }
    }

    const double target = 1.0 / static_cast<double>(d + 1);
    double residual = 0.0;
    for (size_t a = 0; a < orbit.size(); ++a) {
        for (size_t b = a + 1; b < orbit.size(); ++b) {
            double overlap = std::norm(orbit[a].dot(orbit[b]));
            residual = std::max(residual, std::abs(overlap - target));
        }
    }
    if (report != nullptr) {
        report->overlap_residual = residual;
    }
    if (residual > tol) {
        std::ostringstream msg;
        msg << "sic_from_fiducial: fiducial fails the SIC property, overlap residual "
            << residual << " exceeds tolerance " << tol;
        throw std::invalid_argument(msg.str());
    }

    Pom pom;
    pom.dim = d;
    pom.elements.reserve(orbit.size());
    for (const CVector& v : orbit) {
        pom.elements.push_back(v * v.adjoint() / static_cast<double>(d));
    }
    return pom;
}

Index ProductPom::dim() const {
    Index d = 1;
    for (const Pom& r : registers) d *= r.dim;
    return d;
}

Index ProductPom::num_outcomes() const {
    Index k = 1;
    for (const Pom& r : registers) k *= r.size();
    return k;
}

std::vector<Index> ProductPom::strides() const {
    std::vector<Index> s(registers.size());
    Index acc = 1;
    for (int a = n() - 1; a >= 0; --a) {
        s[a] = acc;
        acc *= registers[a].size();
    }
    return s;
}

Index ProductPom::flatten(const std::vector<Index>& digits) const {
    if (static_cast<int>(digits.size()) != n()) {
        throw std::invalid_argument("ProductPom::flatten: digit count mismatch");
    }
    const std::vector<Index> s = strides();
    Index k = 0;
    for (int a = 0; a < n(); ++a) {
        if (digits[a] < 0 || digits[a] >= registers[a].size()) {
            throw std::out_of_range("ProductPom::flatten: digit out of range");
        }
        k += digits[a] * s[a];
    }
    return k;
}

std::vector<Index> ProductPom::unflatten(Index k) const {
    const std::vector<Index> s = strides();
    std::vector<Index> digits(registers.size());
    for (int a = 0; a < n(); ++a) {
        digits[a] = k / s[a];
        k -= digits[a] * s[a];
    }
    return digits;
}

ProductPom product_pom(const Pom& reg, int n) {
    if (n < 1) {
        throw std::invalid_argument("product_pom: register count must be >= 1");
    }
    ProductPom pom;
    pom.registers.assign(static_cast<size_t>(n), reg);
    return pom;
}

ProductPom product_pom(std::vector<Pom> registers) {
    if (registers.empty()) {
        throw std::invalid_argument("product_pom: register count must be >= 1");
    }
    for (const Pom& r : registers) {
        if (r.dim != registers.front().dim) {
            throw std::invalid_argument("product_pom: registers must share one dimension");
        }
    }
    ProductPom pom;
    pom.registers = std::move(registers);
    return pom;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix product_element(const ProductPom& pom, Index k) {
    const std::vector<Index> digits = pom.unflatten(k);
    Matrix out = pom.registers[0].elements[digits[0]];
    for (int a = 1; a < pom.n(); ++a) {
        out = kron(out, pom.registers[a].elements[digits[a]]);
    }
    return out;
}

Pom materialize(const ProductPom& pom) {
    Pom out;
    out.dim = pom.dim();
    const Index total = pom.num_outcomes();
    out.elements.reserve(total);
    for (Index k = 0; k < total; ++k) {
        out.elements.push_back(product_element(pom, k));
    }
    return out;
}

} // namespace tomo
