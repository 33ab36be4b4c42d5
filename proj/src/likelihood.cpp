#include "tomo/likelihood.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace tomo {

namespace {

// Runs tasks 0..num_tasks-1 on up to `threads` workers. Tasks must be
// independent; any per-task outputs are combined by the caller in task order.
void run_tasks(int threads, int num_tasks, const std::function<void(int)>& task) {
    if (threads <= 1 || num_tasks <= 1) {
        for (int t = 0; t < num_tasks; ++t) task(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int t = next.fetch_add(1);
            if (t >= num_tasks) return;
            try {
                task(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int workers = std::min(threads, num_tasks);
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// next(i',j') = sum_{a,b} cur(i'*dr + a, j'*dr + b) * pi(b, a); the partial
// trace of the last register against one POM element. Columns of cur are
// walked sequentially; each output entry contracts one contiguous dr-block.
void trace_last(const Matrix& cur, const Matrix& pi, Matrix& next) {
    const Index dr = pi.rows();
    const Index big = cur.rows();
    const Index dp = big / dr;
    next.setZero(dp, dp);
    const Cplx* cur_data = cur.data();
    Cplx* next_data = next.data();

    if (dr == 2) {
        for (Index col = 0; col < big; ++col) {
            const Index jp = col >> 1;
            const Index b = col & 1;
            const Cplx w0 = pi(b, 0);
            const Cplx w1 = pi(b, 1);
            const Cplx* c = cur_data + col * big;
            Cplx* out = next_data + jp * dp;
            for (Index ip = 0; ip < dp; ++ip) {
                out[ip] += w0 * c[2 * ip] + w1 * c[2 * ip + 1];
            }
        }
        return;
    }

    Cplx w[16];
    for (Index col = 0; col < big; ++col) {
        const Index jp = col / dr;
        const Index b = col - jp * dr;
        const Cplx* c = cur_data + col * big;
        Cplx* out = next_data + jp * dp;
        if (dr <= 16) {
            for (Index a = 0; a < dr; ++a) w[a] = pi(b, a);
            for (Index ip = 0; ip < dp; ++ip) {
                const Cplx* block = c + ip * dr;
                Cplx acc(0.0, 0.0);
                for (Index a = 0; a < dr; ++a) acc += w[a] * block[a];
                out[ip] += acc;
            }
        } else {
            for (Index ip = 0; ip < dp; ++ip) {
                const Cplx* block = c + ip * dr;
                Cplx acc(0.0, 0.0);
                for (Index a = 0; a < dr; ++a) acc += pi(b, a) * block[a];
                out[ip] += acc;
            }
        }
    }
}

inline std::uint64_t trace_last_ops(Index dr, Index dp) {
    return 2ull * static_cast<std::uint64_t>(dr * dr) *
           static_cast<std::uint64_t>(dp * dp);
}

// sum_{i,j} a(i,j) * b(j,i), both dr x dr
inline Cplx contract_pair(const Matrix& a, const Matrix& b) {
    const Index dr = a.rows();
    const Cplx* pa = a.data();
    const Cplx* pb = b.data();
    if (dr == 2) {
        return pa[0] * pb[0] + pa[1] * pb[2] + pa[2] * pb[1] + pa[3] * pb[3];
    }
    Cplx acc(0.0, 0.0);
    for (Index j = 0; j < dr; ++j) {
        for (Index i = 0; i < dr; ++i) {
            acc += pa[i + j * dr] * pb[j + i * dr];
        }
    }
    return acc;
}

// Depth-first walk over outcome suffixes; one scratch matrix per level keeps
// the kernel allocation-free after setup.
struct ProbWalker {
    const ProductPom& pom;
    const std::vector<Index>& strides;
    ProbVector& out;
    std::vector<Matrix> scratch;
    std::uint64_t ops = 0;

    ProbWalker(const ProductPom& p, const std::vector<Index>& s, ProbVector& o)
        : pom(p), strides(s), out(o) {
        const Index dr = pom.register_dim();
        scratch.resize(static_cast<size_t>(pom.n()) + 1);
        Index d = 1;
        for (int m = 1; m <= pom.n(); ++m) {
            scratch[static_cast<size_t>(m)].resize(d, d);
            d *= dr;
        }
    }

    void run(int m, const Matrix& cur, Index base) {
        if (m == 0) {
            out(base) = cur(0, 0).real();
            return;
        }
        // the two bottom levels carry most of the arithmetic in tiny
        // matrices; handle them in flat loops
        if (m == 1) {
            const Pom& reg = pom.registers[0];
            const Index dr = reg.dim;
            const Index stride = strides[0];
            for (Index k = 0; k < reg.size(); ++k) {
                out(base + k * stride) =
                    contract_pair(cur, reg.elements[static_cast<size_t>(k)])
                        .real();
            }
            ops += static_cast<std::uint64_t>(reg.size()) * trace_last_ops(dr, 1);
            return;
        }
        if (m == 2) {
            const Pom& first = pom.registers[1];   // traced first
            const Pom& last = pom.registers[0];
            const Index dr = first.dim;
            Matrix& mid = scratch[2];
            for (Index k2 = 0; k2 < first.size(); ++k2) {
                trace_last(cur, first.elements[static_cast<size_t>(k2)], mid);
                const Index base2 = base + k2 * strides[1];
                for (Index k1 = 0; k1 < last.size(); ++k1) {
                    out(base2 + k1 * strides[0]) =
                        contract_pair(mid, last.elements[static_cast<size_t>(k1)])
                            .real();
                }
                ops += trace_last_ops(dr, dr) +
                       static_cast<std::uint64_t>(last.size()) *
                           trace_last_ops(dr, 1);
            }
            return;
        }
        const Pom& reg = pom.registers[static_cast<size_t>(m) - 1];
        const Index dr = reg.dim;
        const Index dp = cur.rows() / dr;
        Matrix& next = scratch[static_cast<size_t>(m)];
        for (Index k = 0; k < reg.size(); ++k) {
            trace_last(cur, reg.elements[static_cast<size_t>(k)], next);
            ops += trace_last_ops(dr, dp);
            run(m - 1, next, base + k * strides[static_cast<size_t>(m) - 1]);
        }
    }
};

double trace_with(const Matrix& rho, const Matrix& element) {
    // tr(rho Pi) for Hermitian Pi
    return rho.cwiseProduct(element.conjugate()).sum().real();
}

} // namespace

ProbVector born_probs_dense(const Matrix& rho, const Pom& pom) {
    if (rho.rows() != pom.dim || rho.cols() != pom.dim) {
        throw std::invalid_argument("born_probs_dense: dimension mismatch");
    }
    ProbVector out(pom.size());
    for (Index k = 0; k < pom.size(); ++k) {
        out(k) = trace_with(rho, pom.elements[static_cast<size_t>(k)]);
    }
    return out;
}

ProbVector born_probs_product(const Matrix& rho, const ProductPom& pom,
                              int threads, KernelStats* stats) {
    if (rho.rows() != pom.dim() || rho.cols() != pom.dim()) {
        throw std::invalid_argument("born_probs_product: dimension mismatch");
    }
    const int n = pom.n();
    const std::vector<Index> strides = pom.strides();
    ProbVector out(pom.num_outcomes());

    std::uint64_t total_ops = 0;
    if (threads <= 1 || n == 1) {
        ProbWalker walker(pom, strides, out);
        walker.run(n, rho, 0);
        total_ops = walker.ops;
    } else {
        // branch on the last-traced register; subtrees write disjoint slices,
        // so the result is identical for any thread count
        const Pom& top = pom.registers[static_cast<size_t>(n) - 1];
        const Index dr = top.dim;
        const Index dp = rho.rows() / dr;
        const int branches = static_cast<int>(top.size());
        std::vector<std::uint64_t> branch_ops(static_cast<size_t>(branches), 0);
        run_tasks(threads, branches, [&](int k) {
            ProbWalker walker(pom, strides, out);
            Matrix next(dp, dp);
            trace_last(rho, top.elements[static_cast<size_t>(k)], next);
            walker.ops += trace_last_ops(dr, dp);
            walker.run(n - 1, next, Index{k} * strides[static_cast<size_t>(n) - 1]);
            branch_ops[static_cast<size_t>(k)] = walker.ops;
        });
        for (std::uint64_t o : branch_ops) total_ops += o;
    }
    if (stats != nullptr) stats->ops += total_ops;
    return out;
}

ProbVector born_probs_unstructured(const Matrix& rho, const ProductPom& pom,
                                   int threads) {
    if (rho.rows() != pom.dim() || rho.cols() != pom.dim()) {
        throw std::invalid_argument("born_probs_unstructured: dimension mismatch");
    }
    const Index total = pom.num_outcomes();
    ProbVector out(total);
    const int chunks = static_cast<int>(std::min<Index>(total, 64));
    const Index per = (total + chunks - 1) / chunks;
    run_tasks(threads, chunks, [&](int c) {
        const Index lo = Index{c} * per;
        const Index hi = std::min(total, lo + per);
        for (Index k = lo; k < hi; ++k) {
            out(k) = trace_with(rho, product_element(pom, k));
        }
    });
    return out;
}

double neg_log_lik(const Frequencies& freq, const ProbVector& probs) {
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < freq.index.size(); ++i) {
        const Index k = freq.index[i];
        if (k < 0 || k >= probs.size()) {
            throw std::invalid_argument("neg_log_lik: support index out of range");
        }
        const double p = probs(k);
        if (p <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        double y = freq.freq[i] * std::log(p) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return -sum;
}

namespace {

// f_k / p_k on the support; shared precondition check for gradient paths
std::vector<double> support_coefficients(const Frequencies& freq,
                                         const ProbVector& probs) {
    std::vector<double> c(freq.index.size());
    for (size_t i = 0; i < freq.index.size(); ++i) {
        const Index k = freq.index[i];
        if (k < 0 || k >= probs.size()) {
            throw std::invalid_argument("r_operator: support index out of range");
        }
        if (probs(k) <= 0.0) {
            throw SingularGradientError(
                "r_operator: nonpositive probability on the data support");
        }
        c[i] = freq.freq[i] / probs(k);
    }
    return c;
}

// Recursive assembly of sum_k c_k Pi_k grouped by the most significant digit.
struct RBuilder {
    const ProductPom& pom;
    const std::vector<Index>& strides;
    const std::vector<Index>& index;
    const std::vector<double>& coeff;
    std::uint64_t ops = 0;

    Matrix build(int reg_pos, size_t lo, size_t hi, Index base) {
        const int n = pom.n();
        if (reg_pos == n - 1) {
            // last register: a plain weighted sum of its elements
            const Pom& reg = pom.registers[static_cast<size_t>(reg_pos)];
            Matrix acc = Matrix::Zero(reg.dim, reg.dim);
            for (size_t i = lo; i < hi; ++i) {
                acc += coeff[i] * reg.elements[static_cast<size_t>(index[i] - base)];
            }
            ops += (hi - lo) * trace_last_ops(reg.dim, 1);
            return acc;
        }
        const Pom& reg = pom.registers[static_cast<size_t>(reg_pos)];
        const Index dr = reg.dim;
        Index dim = 1;
        for (int b = reg_pos; b < n; ++b) dim *= dr;
        const Index dp = dim / dr;
        const Index stride = strides[static_cast<size_t>(reg_pos)];

        Matrix acc = Matrix::Zero(dim, dim);
        size_t i = lo;
        while (i < hi) {
            const Index digit = (index[i] - base) / stride;
            const Index next_base = base + digit * stride;
            size_t j = i;
            while (j < hi && index[j] < next_base + stride) ++j;
            Matrix sub = build(reg_pos + 1, i, j, next_base);
            const Matrix& pi = reg.elements[static_cast<size_t>(digit)];
            for (Index r = 0; r < dr; ++r) {
                for (Index c = 0; c < dr; ++c) {
                    acc.block(r * dp, c * dp, dp, dp) += pi(r, c) * sub;
                }
            }
            ops += trace_last_ops(dr, dp);
            i = j;
        }
        return acc;
    }
};

} // namespace

Matrix r_operator_dense(const Frequencies& freq, const ProbVector& probs,
                        const Pom& pom) {
    if (probs.size() != pom.size()) {
        throw std::invalid_argument("r_operator_dense: probability length mismatch");
    }
    const std::vector<double> c = support_coefficients(freq, probs);
    Matrix r = Matrix::Zero(pom.dim, pom.dim);
    for (size_t i = 0; i < freq.index.size(); ++i) {
        r += c[i] * pom.elements[static_cast<size_t>(freq.index[i])];
    }
    return r;
}

Matrix r_operator_product(const Frequencies& freq, const ProbVector& probs,
                          const ProductPom& pom, int threads,
                          KernelStats* stats) {
    if (probs.size() != pom.num_outcomes()) {
        throw std::invalid_argument("r_operator_product: probability length mismatch");
    }
    const std::vector<double> c = support_coefficients(freq, probs);
    const std::vector<Index> strides = pom.strides();
    const Index d = pom.dim();
    if (freq.index.empty()) {
        return Matrix::Zero(d, d);
    }
    if (pom.n() == 1) {
        const Pom& reg = pom.registers.front();
        Matrix r = Matrix::Zero(d, d);
        for (size_t i = 0; i < freq.index.size(); ++i) {
            r += c[i] * reg.elements[static_cast<size_t>(freq.index[i])];
        }
        if (stats != nullptr) {
            stats->ops += freq.index.size() * trace_last_ops(d, 1);
        }
        return r;
    }

    // top-level digit groups, built in parallel and combined in digit order
    const Pom& top = pom.registers.front();
    const Index dr = top.dim;
    const Index dp = d / dr;
    const Index stride = strides.front();
    struct Group {
        Index digit;
        size_t lo, hi;
    };
    std::vector<Group> groups;
    size_t i = 0;
    while (i < freq.index.size()) {
        const Index digit = freq.index[i] / stride;
        size_t j = i;
        while (j < freq.index.size() && freq.index[j] < (digit + 1) * stride) ++j;
        groups.push_back({digit, i, j});
        i = j;
    }

    std::vector<Matrix> subs(groups.size());
    std::vector<std::uint64_t> group_ops(groups.size(), 0);
    run_tasks(threads, static_cast<int>(groups.size()), [&](int g) {
        const Group& grp = groups[static_cast<size_t>(g)];
        RBuilder builder{pom, strides, freq.index, c, 0};
        subs[static_cast<size_t>(g)] =
            builder.build(1, grp.lo, grp.hi, grp.digit * stride);
        group_ops[static_cast<size_t>(g)] = builder.ops;
    });

    Matrix r = Matrix::Zero(d, d);
    std::uint64_t total_ops = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
        const Matrix& pi = top.elements[static_cast<size_t>(groups[g].digit)];
        for (Index row = 0; row < dr; ++row) {
            for (Index col = 0; col < dr; ++col) {
                r.block(row * dp, col * dp, dp, dp) += pi(row, col) * subs[g];
            }
        }
        total_ops += group_ops[g] + trace_last_ops(dr, dp);
    }
    if (stats != nullptr) stats->ops += total_ops;
    return r;
}

Matrix r_operator_unstructured(const Frequencies& freq, const ProbVector& probs,
                               const ProductPom& pom, int threads) {
    if (probs.size() != pom.num_outcomes()) {
        throw std::invalid_argument("r_operator_unstructured: probability length mismatch");
    }
    const std::vector<double> c = support_coefficients(freq, probs);
    const Index d = pom.dim();
    const size_t support = freq.index.size();
    // fixed chunk count so the summation order never depends on the thread count
    const int chunks = static_cast<int>(std::min<size_t>(support, 64));
    if (chunks == 0) return Matrix::Zero(d, d);
    const size_t per = (support + static_cast<size_t>(chunks) - 1) /
                       static_cast<size_t>(chunks);
    std::vector<Matrix> partial(static_cast<size_t>(chunks));
    run_tasks(threads, chunks, [&](int ch) {
        const size_t lo = static_cast<size_t>(ch) * per;
        const size_t hi = std::min(support, lo + per);
        Matrix acc = Matrix::Zero(d, d);
        for (size_t i = lo; i < hi; ++i) {
            acc += c[i] * product_element(pom, freq.index[i]);
        }
        partial[static_cast<size_t>(ch)] = std::move(acc);
    });
    Matrix r = Matrix::Zero(d, d);
    for (const Matrix& p : partial) r += p;
    return r;
}

std::vector<double> hessian_proxy(const Frequencies& freq, const ProbVector& probs) {
    std::vector<double> q(freq.index.size());
    for (size_t i = 0; i < freq.index.size(); ++i) {
        const Index k = freq.index[i];
        if (k < 0 || k >= probs.size()) {
            throw std::invalid_argument("hessian_proxy: support index out of range");
        }
        const double p = probs(k);
        if (p <= 0.0) {
            throw SingularGradientError(
                "hessian_proxy: nonpositive probability on the data support");
        }
        q[i] = freq.freq[i] / (p * p);
    }
    return q;
}

double proxy_angle_cos(const std::vector<double>& q_now,
                       const std::vector<double>& q_prev) {
    if (q_now.size() != q_prev.size()) {
        throw std::invalid_argument("proxy_angle_cos: support mismatch");
    }
    double dot = 0.0, nn = 0.0, pp = 0.0;
    for (size_t i = 0; i < q_now.size(); ++i) {
        dot += q_now[i] * q_prev[i];
        nn += q_now[i] * q_now[i];
        pp += q_prev[i] * q_prev[i];
    }
    if (nn == 0.0 || pp == 0.0) {
        throw std::invalid_argument("proxy_angle_cos: zero proxy vector");
    }
    return dot / std::sqrt(nn * pp);
}

LikelihoodModel::LikelihoodModel(Frequencies freq, Pom pom)
    : freq_(std::move(freq)), measurement_(std::move(pom)) {
    const Pom& m = std::get<Pom>(measurement_);
    dim_ = m.dim;
    num_outcomes_ = m.size();
    freq_.validate(num_outcomes_);
}

LikelihoodModel::LikelihoodModel(Frequencies freq, ProductPom pom,
                                 bool use_product_kernel)
    : freq_(std::move(freq)),
      measurement_(std::move(pom)),
      use_product_kernel_(use_product_kernel) {
    const ProductPom& m = std::get<ProductPom>(measurement_);
    dim_ = m.dim();
    num_outcomes_ = m.num_outcomes();
    freq_.validate(num_outcomes_);
}

ProbVector LikelihoodModel::probs(const Matrix& rho) const {
    if (std::holds_alternative<Pom>(measurement_)) {
        return born_probs_dense(rho, std::get<Pom>(measurement_));
    }
    const ProductPom& m = std::get<ProductPom>(measurement_);
    return use_product_kernel_ ? born_probs_product(rho, m, threads)
                               : born_probs_unstructured(rho, m, threads);
}

Matrix LikelihoodModel::r_operator(const ProbVector& p) const {
    if (std::holds_alternative<Pom>(measurement_)) {
        return r_operator_dense(freq_, p, std::get<Pom>(measurement_));
    }
    const ProductPom& m = std::get<ProductPom>(measurement_);
    return use_product_kernel_ ? r_operator_product(freq_, p, m, threads)
                               : r_operator_unstructured(freq_, p, m, threads);
}

bool LikelihoodModel::support_positive(const ProbVector& p) const {
    for (Index k : freq_.index) {
        if (p(k) <= 0.0) return false;
    }
    return true;
}

} // namespace tomo
