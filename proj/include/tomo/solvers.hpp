#pragma once

#include "tomo/likelihood.hpp"
#include "tomo/types.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tomo {

enum class Algorithm { apg, dg, cg, cg_apg };
enum class Phase { cg, apg, dg };
enum class Status { running, converged_target, stalled, max_iter, time_out };

std::string to_string(Algorithm a);
std::string to_string(Phase p);
std::string to_string(Status s);
std::optional<Algorithm> algorithm_from_string(const std::string& name);

struct SolverConfig {
    Algorithm algorithm = Algorithm::cg_apg;
    double beta = 0.5;          // backtracking shrink, in (0,1)
    double alpha = 1.1;         // step growth, > 1
    double gamma = 0.01;        // restart threshold on the normalized overlap
    double phi = 0.01;          // CG->APG switchover angle in radians
    double t1 = 1.0;            // initial step size, > 0
    double eps_dg = 0.05;       // DG dilution cap, in (0,1]
    bool use_bb = true;         // Barzilai-Borwein step estimation
    std::int64_t max_iter = 100000;
    int stall_window = 10;
    double stall_tol = 1e-12;
    std::optional<double> f_target;
    double time_budget_s = std::numeric_limits<double>::infinity();
    std::optional<Matrix> rho0;        // default: maximally mixed
    int ls_max_evals = 30;             // CG line-search budget per iteration
    bool check_contracts = false;      // count per-step contract violations

    void validate() const;   // throws std::invalid_argument on bad ranges
};

struct TraceRecord {
    std::int64_t iter;
    double elapsed_s;
    double f;
    double step;        // accepted t (APG), epsilon (DG), line-search s (CG)
    bool restarted;
    Phase phase;
};

struct SolverTrace {
    std::vector<TraceRecord> records;
    Status status = Status::running;
};

struct SolverResult {
    Matrix rho_hat;      // lowest-F iterate encountered
    double best_f = std::numeric_limits<double>::infinity();
    SolverTrace trace;
    std::int64_t contract_violations = 0;
};

/// Termination policy shared by all solvers. Requires at least one recorded
/// iteration. Priority: converged_target, stalled, max_iter, time_out.
Status check_termination(const SolverTrace& trace, const SolverConfig& cfg,
                         double elapsed_s);

SolverResult apg_solve(const LikelihoodModel& model, const SolverConfig& cfg);
SolverResult dg_solve(const LikelihoodModel& model, const SolverConfig& cfg);
SolverResult cg_solve(const LikelihoodModel& model, const SolverConfig& cfg);
SolverResult cg_apg_solve(const LikelihoodModel& model, const SolverConfig& cfg);

/// Dispatches on cfg.algorithm.
SolverResult solve(const LikelihoodModel& model, const SolverConfig& cfg);

} // namespace tomo
