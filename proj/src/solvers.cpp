#include "tomo/solvers.hpp"

#include "tomo/projection.hpp"
#include "tomo/states.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace tomo {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::apg: return "apg";
        case Algorithm::dg: return "dg";
        case Algorithm::cg: return "cg";
        case Algorithm::cg_apg: return "cg-apg";
    }
    return "?";
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::cg: return "CG";
        case Phase::apg: return "APG";
        case Phase::dg: return "DG";
    }
    return "?";
}

std::string to_string(Status s) {
    switch (s) {
        case Status::running: return "running";
        case Status::converged_target: return "converged_target";
        case Status::stalled: return "stalled";
        case Status::max_iter: return "max_iter";
        case Status::time_out: return "time_out";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_string(const std::string& name) {
    if (name == "apg") return Algorithm::apg;
    if (name == "dg") return Algorithm::dg;
    if (name == "cg") return Algorithm::cg;
    if (name == "cg-apg") return Algorithm::cg_apg;
    return std::nullopt;
}

void SolverConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("SolverConfig: beta must be in (0,1)");
    }
    if (!(alpha > 1.0)) {
        throw std::invalid_argument("SolverConfig: alpha must be > 1");
    }
    if (!(gamma >= -1.0 && gamma <= 1.0)) {
        throw std::invalid_argument("SolverConfig: gamma must be in [-1,1]");
    }
    if (!(phi >= 0.0 && phi <= M_PI)) {
        throw std::invalid_argument("SolverConfig: phi must be in [0,pi]");
    }
    if (!(t1 > 0.0)) {
        throw std::invalid_argument("SolverConfig: t1 must be > 0");
    }
    if (!(eps_dg > 0.0 && eps_dg <= 1.0)) {
        throw std::invalid_argument("SolverConfig: eps_dg must be in (0,1]");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    }
    if (stall_window < 1) {
        throw std::invalid_argument("SolverConfig: stall window must be >= 1");
    }
    if (!(stall_tol >= 0.0)) {
        throw std::invalid_argument("SolverConfig: stall tolerance must be >= 0");
    }
    if (!(time_budget_s > 0.0)) {
        throw std::invalid_argument("SolverConfig: time budget must be > 0");
    }
    if (ls_max_evals < 3) {
        throw std::invalid_argument("SolverConfig: line-search budget must be >= 3");
    }
}

Status check_termination(const SolverTrace& trace, const SolverConfig& cfg,
                         double elapsed_s) {
    const auto& recs = trace.records;
    if (recs.empty()) {
        throw std::invalid_argument("check_termination: no iterations recorded");
    }
    const double f = recs.back().f;
    if (cfg.f_target && f <= *cfg.f_target) {
        return Status::converged_target;
    }
    const size_t w = static_cast<size_t>(cfg.stall_window);
    if (recs.size() > w) {
        const double f_old = recs[recs.size() - 1 - w].f;
        if (f_old - f <= cfg.stall_tol * std::max(1.0, std::abs(f))) {
            return Status::stalled;
        }
    }
    if (recs.back().iter >= cfg.max_iter) {
        return Status::max_iter;
    }
    if (elapsed_s >= cfg.time_budget_s) {
        return Status::time_out;
    }
    return Status::running;
}

namespace {

struct PhaseState {
    Matrix rho;
    ProbVector p;
    double f;
};

struct RunContext {
    const LikelihoodModel& model;
    const SolverConfig& cfg;
    SolverResult result;
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();

    double elapsed() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }

    // Appends a record, tracks the best iterate, applies the termination
    // policy. Returns true when the run is over.
    bool record(std::int64_t iter, double f, const Matrix& rho, double step,
                bool restarted, Phase phase) {
        const double el = elapsed();
        result.trace.records.push_back({iter, el, f, step, restarted, phase});
        if (f < result.best_f) {
            result.best_f = f;
            result.rho_hat = rho;
        }
        const Status s = check_termination(result.trace, cfg, el);
        if (s != Status::running) {
            result.trace.status = s;
            return true;
        }
        return false;
    }

    void check(bool ok) {
        if (!ok) ++result.contract_violations;
    }

    // Cheap per-iteration feasibility checks; the projected spectrum makes a
    // full eigendecomposition unnecessary for APG iterates.
    void check_state(const Matrix& rho, const RVector& spectrum) {
        if (!cfg.check_contracts) return;
        check(hermiticity_residual(rho) <= 1e-12);
        check(std::abs(rho.trace().real() - 1.0) <= 1e-10);
        check(spectrum.minCoeff() >= -1e-10);
        check(std::abs(spectrum.sum() - 1.0) <= 1e-10);
    }
};

PhaseState initial_state(const LikelihoodModel& model, const SolverConfig& cfg) {
    PhaseState s;
    if (cfg.rho0) {
        if (cfg.rho0->rows() != model.dim() || cfg.rho0->cols() != model.dim()) {
            throw std::invalid_argument("solver: rho0 dimension mismatch");
        }
        if (!check_density(*cfg.rho0).ok()) {
            throw std::invalid_argument("solver: rho0 is not a valid state");
        }
        s.rho = *cfg.rho0;
    } else {
        s.rho = maximally_mixed(model.dim());
    }
    s.p = model.probs(s.rho);
    s.f = model.nll(s.p);
    if (!std::isfinite(s.f)) {
        throw std::invalid_argument(
            "solver: objective is not finite at the initial state");
    }
    return s;
}

// APG with adaptive restart, Barzilai-Borwein step sizes, step-scaled
// momentum, and the reset of the momentum point when it leaves the region of
// positive support probabilities.
void apg_phase(RunContext& ctx, PhaseState s0, std::int64_t start_iter) {
    const LikelihoodModel& model = ctx.model;
    const SolverConfig& cfg = ctx.cfg;

    Matrix rho = std::move(s0.rho);         // rho_{i-1}
    ProbVector p_rho = std::move(s0.p);
    double f_rho = s0.f;

    Matrix varrho = rho;                    // momentum point, may be unphysical
    ProbVector p_var = p_rho;
    double f_var = f_rho;

    double theta = 1.0;
    double t_accepted = cfg.t1;             // t_{i-1}
    bool restarted_prev = false;

    bool have_bb = false;                   // previous momentum point on record
    Matrix bb_point, bb_r;

    for (std::int64_t i = start_iter;; ++i) {
        const Matrix r_var = model.r_operator(p_var);   // gradient is -R

        double t = cfg.t1;
        if (i != start_iter) {
            t = cfg.alpha * t_accepted;
            if (cfg.use_bb && !restarted_prev && have_bb) {
                // t = <dvar, dgrad> / <dgrad, dgrad> over consecutive momentum
                // points; fall back to the growth rule when degenerate
                const Matrix dvar = varrho - bb_point;
                const Matrix dgrad = bb_r - r_var;
                const double denom = real_inner(dgrad, dgrad);
                if (denom > 0.0) {
                    const double t_bb = real_inner(dvar, dgrad) / denom;
                    if (std::isfinite(t_bb) && t_bb > 0.0) t = t_bb;
                }
            }
        }
        bb_point = varrho;
        bb_r = r_var;
        have_bb = true;

        // projected gradient step with backtracking
        Matrix rho_i, delta;
        RVector spectrum;
        ProbVector p_i;
        double f_i = 0.0, quad = 0.0;
        for (;;) {
            rho_i = project_to_states(varrho + t * r_var, &spectrum);
            delta = rho_i - varrho;
            p_i = model.probs(rho_i);
            f_i = model.nll(p_i);
            quad = f_var - real_inner(r_var, delta) +
                   real_inner(delta, delta) / (2.0 * t);
            if (f_i <= quad) break;
            t *= cfg.beta;
            if (t < 1e-300) {
                ctx.record(i, f_rho, rho, t, false, Phase::apg);
                ctx.result.trace.status = Status::stalled;
                return;
            }
        }
        if (cfg.check_contracts) {
            ctx.check(f_i <= quad);   // accepted-step inequality
            ctx.check_state(rho_i, spectrum);
        }

        const Matrix delta_hat = rho_i - rho;
        const double dn = delta.norm();
        const double dhn = delta_hat.norm();
        const double overlap =
            (dn > 0.0 && dhn > 0.0)
                ? real_inner(delta, delta_hat) / (dn * dhn)
                : 0.0;   // no movement carries no momentum worth keeping

        const bool restart = overlap < cfg.gamma;
        if (restart) {
            rho_i = rho;
            p_i = p_rho;
            f_i = f_rho;
            varrho = rho;
            p_var = p_rho;
            f_var = f_rho;
            theta = 1.0;
        } else {
            const double theta_hat =
                (i == start_iter) ? theta
                                  : theta * std::sqrt(t_accepted / t);
            const double theta_new =
                0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_hat * theta_hat));
            const double coef = (theta_hat - 1.0) / theta_new;
            varrho = rho_i + coef * delta_hat;
            theta = theta_new;

            if (coef == 0.0 || dhn == 0.0) {
                // momentum point coincides with the iterate
                p_var = p_i;
                f_var = f_i;
            } else {
                p_var = model.probs(varrho);
                if (model.support_positive(p_var)) {
                    f_var = model.nll(p_var);
                } else {
                    // nonpositive probability at the momentum point: reset
                    varrho = rho_i;
                    p_var = p_i;
                    f_var = f_i;
                }
            }
            rho = rho_i;
            p_rho = p_i;
            f_rho = f_i;
        }

        t_accepted = t;
        restarted_prev = restart;
        if (ctx.record(i, f_i, rho_i, t, restart, Phase::apg)) return;
    }
}

struct LineSearchResult {
    bool ok = false;
    double s = 0.0;
    double f = 0.0;
    ProbVector p;
};

// Bracket by doubling from the seed step, then refine by quadratic
// interpolation on the bracket, all within max_evals objective evaluations.
// Succeeds only with a point strictly below f0.
LineSearchResult line_search(
    const std::function<double(double, ProbVector&)>& eval, double f0,
    double s_init, int max_evals) {
    LineSearchResult best;
    best.f = f0;
    int evals = 0;
    ProbVector scratch;
    auto probe = [&](double s) {
        const double f = eval(s, scratch);
        ++evals;
        if (f < best.f) {
            best.ok = true;
            best.s = s;
            best.f = f;
            best.p = scratch;
        }
        return f;
    };

    // bracket (lo, mid, hi) with f(mid) < f(lo), f(mid) <= f(hi)
    double lo = 0.0, mid = 0.0, hi = 0.0;
    double flo = f0, fmid = 0.0, fhi = 0.0;
    const double f1 = probe(s_init);
    if (f1 < f0) {
        mid = s_init;
        fmid = f1;
        hi = 2.0 * s_init;
        fhi = probe(hi);
        while (fhi < fmid && evals < max_evals) {
            lo = mid;
            flo = fmid;
            mid = hi;
            fmid = fhi;
            hi *= 2.0;
            fhi = probe(hi);
        }
    } else {
        double s = s_init;
        double fs = f1;
        double above_s = s_init, above_f = f1;
        while (evals < max_evals) {
            above_s = s;
            above_f = fs;
            s *= 0.5;
            fs = probe(s);
            if (fs < f0) break;
        }
        if (!(fs < f0)) return best;   // ok stays false
        mid = s;
        fmid = fs;
        hi = above_s;
        fhi = above_f;
    }

    while (evals < max_evals && (hi - lo) > 1e-8 * std::max(mid, 1e-12)) {
        const double num = (mid - lo) * (mid - lo) * (fmid - fhi) -
                           (mid - hi) * (mid - hi) * (fmid - flo);
        const double den =
            (mid - lo) * (fmid - fhi) - (mid - hi) * (fmid - flo);
        double sq = (den != 0.0) ? mid - 0.5 * num / den
                                 : 0.5 * (lo + hi);
        const double gap = 1e-3 * (hi - lo);
        if (!std::isfinite(sq) || !(sq > lo + gap && sq < hi - gap) ||
            std::abs(sq - mid) < gap) {
            // vertex degenerate or outside; bisect the wider side
            sq = (mid - lo > hi - mid) ? 0.5 * (lo + mid) : 0.5 * (mid + hi);
        }
        const double fq = probe(sq);
        if (sq < mid) {
            if (fq <= fmid) {
                hi = mid;
                fhi = fmid;
                mid = sq;
                fmid = fq;
            } else {
                lo = sq;
                flo = fq;
            }
        } else {
            if (fq <= fmid) {
                lo = mid;
                flo = fmid;
                mid = sq;
                fmid = fq;
            } else {
                hi = sq;
                fhi = fq;
            }
        }
    }
    return best;
}

struct CgOutcome {
    bool switched = false;
    PhaseState state;
    std::int64_t next_iter = 0;
};

// Conjugate gradient in the factored space rho = A^dag A / tr(A^dag A),
// Polak-Ribiere directions, line search along the direction. With
// enable_switch the Hessian-proxy overlap between consecutive iterates is
// monitored and the function hands control back for the APG phase.
CgOutcome cg_phase(RunContext& ctx, PhaseState s0, std::int64_t start_iter,
                   bool enable_switch) {
    const LikelihoodModel& model = ctx.model;
    const SolverConfig& cfg = ctx.cfg;
    const Index d = model.dim();
    const Matrix id = Matrix::Identity(d, d);
    const double cos_phi = std::cos(cfg.phi);

    Matrix a = sqrt_psd(s0.rho);
    a /= a.norm();                       // tr(A^dag A) = 1
    Matrix rho = std::move(s0.rho);
    ProbVector p = std::move(s0.p);
    double f = s0.f;
    double f_prev = f;

    std::vector<double> q_prev;
    if (enable_switch) q_prev = model.proxy(p);

    Matrix r = model.r_operator(p);
    Matrix grad = -(a * (r - id));       // Euclidean gradient of F~ at tr = 1
    Matrix dir = -grad;
    double g2 = real_inner(grad, grad);
    double s_seed = cfg.t1;

    auto eval = [&](double s, ProbVector& p_out) {
        const Matrix b = a + s * dir;
        const double nb2 = b.squaredNorm();
        if (!(nb2 > 0.0)) return std::numeric_limits<double>::infinity();
        const Matrix rho_s = (b.adjoint() * b) / nb2;
        p_out = model.probs(rho_s);
        return model.nll(p_out);
    };

    for (std::int64_t i = start_iter;; ++i) {
        LineSearchResult ls;
        const double dir_norm = dir.norm();
        if (dir_norm > 1e-14) {
            ls = line_search(eval, f, s_seed, cfg.ls_max_evals);
            if (!ls.ok && real_inner(grad, dir) < 0.0 &&
                (dir + grad).norm() > 1e-14 * dir_norm) {
                // conjugate direction failed; retry along steepest descent
                dir = -grad;
                ls = line_search(eval, f, s_seed, cfg.ls_max_evals);
            }
        }

        double step = 0.0;
        if (ls.ok) {
            const Matrix b = a + ls.s * dir;
            const double nb = b.norm();
            a = b / nb;
            dir /= nb;                    // keep direction in the rescaled frame
            step = ls.s * nb;
            s_seed = std::max(step, 1e-12);
            rho = symmetrized(a.adjoint() * a);
            p = std::move(ls.p);
            f = ls.f;

            r = model.r_operator(p);
            const Matrix grad_new = -(a * (r - id));
            const double g2_new = real_inner(grad_new, grad_new);
            const double beta_pr =
                (g2 > 0.0) ? real_inner(grad_new, grad_new - grad) / g2 : 0.0;
            Matrix dir_new = -grad_new + beta_pr * dir;
            if (real_inner(grad_new, dir_new) >= 0.0) {
                dir_new = -grad_new;      // not a descent direction: restart
            }
            grad = grad_new;
            dir = std::move(dir_new);
            g2 = g2_new;

            if (cfg.check_contracts) {
                ctx.check(f <= f_prev);   // line search must not increase F~
                ctx.check(check_density(rho).ok());
            }
            f_prev = f;
        } else {
            // no strictly lower point within the budget; fall back to the
            // steepest descent direction for the next round and let the stall
            // window terminate the run if this persists
            dir = -grad;
        }

        if (ctx.record(i, f, rho, step, false, Phase::cg)) return {};

        if (enable_switch) {
            const std::vector<double> q_now = model.proxy(p);
            const double cosine = proxy_angle_cos(q_now, q_prev);
            q_prev = q_now;
            if (cosine > cos_phi) {
                return {true, {rho, p, f}, i + 1};
            }
        }
    }
}

} // namespace

SolverResult apg_solve(const LikelihoodModel& model, const SolverConfig& cfg) {
    cfg.validate();
    RunContext ctx{model, cfg, {}, std::chrono::steady_clock::now()};
    PhaseState s = initial_state(model, cfg);
    ctx.result.rho_hat = s.rho;
    apg_phase(ctx, std::move(s), 1);
    return std::move(ctx.result);
}

SolverResult dg_solve(const LikelihoodModel& model, const SolverConfig& cfg) {
    cfg.validate();
    RunContext ctx{model, cfg, {}, std::chrono::steady_clock::now()};
    PhaseState s = initial_state(model, cfg);
    ctx.result.rho_hat = s.rho;

    const Index d = model.dim();
    const Matrix id = Matrix::Identity(d, d);
    Matrix rho = std::move(s.rho);
    ProbVector p = std::move(s.p);
    double f = s.f;
    double eps = cfg.eps_dg;

    for (std::int64_t i = 1;; ++i) {
        const Matrix r = model.r_operator(p);
        // multiplicative update rho -> G rho G / tr, G = 1 + eps (R - 1);
        // halve eps until the step does not increase F
        for (;;) {
            const Matrix g = id + eps * (r - id);
            Matrix cand = symmetrized(g * rho * g);
            cand /= cand.trace().real();
            ProbVector pc = model.probs(cand);
            const double fc = model.nll(pc);
            if (fc <= f) {
                rho = std::move(cand);
                p = std::move(pc);
                f = fc;
                break;
            }
            eps *= 0.5;
            if (eps < 1e-300) {
                ctx.record(i, f, rho, eps, false, Phase::dg);
                ctx.result.trace.status = Status::stalled;
                return std::move(ctx.result);
            }
        }
        const double eps_used = eps;
        eps = std::min(cfg.alpha * eps, cfg.eps_dg);
        if (cfg.check_contracts) {
            ctx.check(check_density(rho).ok());
        }
        if (ctx.record(i, f, rho, eps_used, false, Phase::dg)) break;
    }
    return std::move(ctx.result);
}

SolverResult cg_solve(const LikelihoodModel& model, const SolverConfig& cfg) {
    cfg.validate();
    RunContext ctx{model, cfg, {}, std::chrono::steady_clock::now()};
    PhaseState s = initial_state(model, cfg);
    ctx.result.rho_hat = s.rho;
    cg_phase(ctx, std::move(s), 1, false);
    return std::move(ctx.result);
}

SolverResult cg_apg_solve(const LikelihoodModel& model, const SolverConfig& cfg) {
    cfg.validate();
    RunContext ctx{model, cfg, {}, std::chrono::steady_clock::now()};
    PhaseState s = initial_state(model, cfg);
    ctx.result.rho_hat = s.rho;
    CgOutcome out = cg_phase(ctx, std::move(s), 1, true);
    if (out.switched && ctx.result.trace.status == Status::running) {
        apg_phase(ctx, std::move(out.state), out.next_iter);
    }
    return std::move(ctx.result);
}

SolverResult solve(const LikelihoodModel& model, const SolverConfig& cfg) {
    switch (cfg.algorithm) {
        case Algorithm::apg: return apg_solve(model, cfg);
        case Algorithm::dg: return dg_solve(model, cfg);
        case Algorithm::cg: return cg_solve(model, cfg);
        case Algorithm::cg_apg: return cg_apg_solve(model, cfg);
    }
    throw std::invalid_argument("solve: unknown algorithm");
}

} // namespace tomo
