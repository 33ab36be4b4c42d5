#pragma once

#include "tomo/frequencies.hpp"
#include "tomo/pom.hpp"
#include "tomo/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace tomo {

/// Raised when a gradient or curvature quantity is requested at a point with
/// a nonpositive probability on the data support.
class SingularGradientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Elementary add/multiply count of a kernel invocation.
struct KernelStats {
    std::uint64_t ops = 0;
};

/// Born probabilities p_k = tr(rho Pi_k) by direct trace, O(K d^2).
ProbVector born_probs_dense(const Matrix& rho, const Pom& pom);

/// Born probabilities via register-by-register partial traces,
/// O(K_r^{n+1}) for K_r > d_r^2.
ProbVector born_probs_product(const Matrix& rho, const ProductPom& pom,
                              int threads = 1, KernelStats* stats = nullptr);

/// Dense-cost evaluation of a product POM with elements built on the fly;
/// the "no product structure" baseline, O(K d^2) without materializing.
ProbVector born_probs_unstructured(const Matrix& rho, const ProductPom& pom,
                                   int threads = 1);

/// Normalized negative log-likelihood, -sum f_k ln p_k over the support.
/// Returns +infinity when any support probability is <= 0.
double neg_log_lik(const Frequencies& freq, const ProbVector& probs);

/// R = sum_k Pi_k f_k / p_k over the support; the negative gradient of F.
Matrix r_operator_dense(const Frequencies& freq, const ProbVector& probs,
                        const Pom& pom);

Matrix r_operator_product(const Frequencies& freq, const ProbVector& probs,
                          const ProductPom& pom, int threads = 1,
                          KernelStats* stats = nullptr);

Matrix r_operator_unstructured(const Frequencies& freq, const ProbVector& probs,
                               const ProductPom& pom, int threads = 1);

/// Hessian diagonal proxy q_k = f_k / p_k^2, aligned with the frequency support.
std::vector<double> hessian_proxy(const Frequencies& freq, const ProbVector& probs);

/// Cosine of the angle between two proxy vectors over a common support.
double proxy_angle_cos(const std::vector<double>& q_now,
                       const std::vector<double>& q_prev);

/// Binds data and measurement to one kernel choice; the solver-facing surface.
class LikelihoodModel {
public:
    LikelihoodModel(Frequencies freq, Pom pom);
    LikelihoodModel(Frequencies freq, ProductPom pom, bool use_product_kernel = true);

    Index dim() const { return dim_; }
    Index num_outcomes() const { return num_outcomes_; }
    const Frequencies& freq() const { return freq_; }
    bool product_kernel() const { return use_product_kernel_; }

    ProbVector probs(const Matrix& rho) const;
    double nll(const ProbVector& p) const { return neg_log_lik(freq_, p); }
    Matrix r_operator(const ProbVector& p) const;
    std::vector<double> proxy(const ProbVector& p) const {
        return hessian_proxy(freq_, p);
    }
    /// True when every support probability is strictly positive.
    bool support_positive(const ProbVector& p) const;

    int threads = 1;

private:
    Frequencies freq_;
    std::variant<Pom, ProductPom> measurement_;
    bool use_product_kernel_ = false;
    Index dim_ = 0;
    Index num_outcomes_ = 0;
};

} // namespace tomo
