#include "tomo/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>

namespace {

// Shared solver knobs; every subcommand that runs a solver takes the same set.
void add_solver_flags(CLI::App* cmd, tomo::SolverConfig& cfg, bool& no_bb) {
    cmd->add_option("--beta", cfg.beta, "backtracking shrink factor in (0,1)");
    cmd->add_option("--alpha", cfg.alpha, "step growth factor > 1");
    cmd->add_option("--gamma", cfg.gamma, "restart threshold on the step overlap");
    cmd->add_option("--phi", cfg.phi, "CG->APG switchover angle in radians");
    cmd->add_option("--t1", cfg.t1, "initial step size");
    cmd->add_option("--eps-dg", cfg.eps_dg, "DG dilution cap in (0,1]");
    cmd->add_option("--max-iter", cfg.max_iter, "iteration budget");
    cmd->add_option("--time-budget-s", cfg.time_budget_s, "wall-time budget per run");
    cmd->add_flag("--no-bb", no_bb, "disable Barzilai-Borwein step sizes");
    cmd->add_option("--stall-window", cfg.stall_window,
                    "iterations with no progress before a run counts as stalled");
    cmd->add_option("--stall-tol", cfg.stall_tol, "relative stall tolerance");
}

std::vector<tomo::Algorithm> parse_algorithms(const std::string& csv) {
    std::vector<tomo::Algorithm> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto alg = tomo::algorithm_from_string(item);
        if (!alg) {
            throw CLI::ValidationError("--algorithms", "unknown algorithm '" + item + "'");
        }
        out.push_back(*alg);
    }
    if (out.empty()) {
        throw CLI::ValidationError("--algorithms", "empty algorithm list");
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Maximum-likelihood quantum state tomography: accelerated "
        "projected-gradient reconstruction with product-structure kernels"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand(
        "simulate", "Generate count data (exact, per-setting, or global sampling)");
    tomo::SimulateArgs sim_args;
    std::string sim_mode = "exact";
    sim->add_option("--state", sim_args.state_spec,
                    "haar:<seed> | w | ghz | file:<path>")
        ->required();
    sim->add_option("--pom", sim_args.pom_spec,
                    "pauli6 | tetrahedron | sic:<fiducial> | file:<pom> | "
                    "prod:<register>:<n>")
        ->required();
    sim->add_option("--mode", sim_mode, "exact | per-setting | global")
        ->check(CLI::IsMember({"exact", "per-setting", "global"}));
    sim->add_option("--shots", sim_args.plan.shots_per_setting,
                    "copies per setting (per-setting mode)");
    sim->add_option("--total-shots", sim_args.plan.total_shots,
                    "copies in total (global mode)");
    sim->add_option("--noise", sim_args.noise, "depolarizing fraction in [0,1]");
    sim->add_option("--seed", sim_args.plan.seed, "sampling seed");
    sim->add_option("--out", sim_args.counts_out, "counts file")->required();
    sim->add_option("--truth-out", sim_args.truth_out, "true-state file");
    sim->add_option("--threads", sim_args.threads, "kernel threads");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct",
                                   "Maximum-likelihood estimate from a counts file");
    tomo::ReconstructArgs rec_args;
    std::string rec_algorithm = "cg-apg";
    bool rec_no_bb = false;
    bool rec_no_product = false;
    double rec_target = 0.0;
    std::int64_t rec_copies = 0;
    rec->add_option("counts", rec_args.counts_path, "counts file")->required();
    rec->add_option("--pom", rec_args.pom_spec, "POM spec")->required();
    rec->add_option("--algorithm", rec_algorithm, "apg | cg | dg | cg-apg")
        ->check(CLI::IsMember({"apg", "cg", "dg", "cg-apg"}));
    add_solver_flags(rec, rec_args.cfg, rec_no_bb);
    rec->add_option("--target-l-ratio", rec_target,
                    "stop at L/L_max >= ratio (needs --truth)");
    rec->add_option("--truth", rec_args.truth_path, "true-state file");
    rec->add_option("--copies-n", rec_copies,
                    "effective N for exact-frequency targets");
    rec->add_flag("--no-product-kernel", rec_no_product,
                  "evaluate product POMs densely");
    rec->add_option("--threads", rec_args.threads, "kernel threads");
    rec->add_option("--trace", rec_args.out_trace, "trace CSV path");
    rec->add_option("--out", rec_args.out_state, "estimate file");

    // benchmark
    auto* bench = app.add_subcommand(
        "benchmark", "Timed reconstruction sweep over qubit counts and algorithms");
    tomo::BenchmarkArgs bench_args;
    std::string bench_algorithms = "cg-apg,apg,cg,dg";
    bool bench_no_bb = false;
    bool bench_no_product = false;
    bench->add_option("--n-min", bench_args.n_min, "smallest register count");
    bench->add_option("--n-max", bench_args.n_max, "largest register count");
    bench->add_option("--states", bench_args.states_per_n, "states per n");
    bench->add_option("--noise", bench_args.noise, "depolarizing noise fraction");
    bench->add_option("--pom", bench_args.register_pom_spec, "register POM spec");
    bench->add_option("--algorithms", bench_algorithms, "comma-separated list");
    add_solver_flags(bench, bench_args.solver, bench_no_bb);
    bench->add_option("--target-l-ratio", bench_args.target_ratio,
                      "convergence criterion L/L_max");
    bench->add_option("--shots", bench_args.shots_per_setting,
                      "copies per setting defining N for product-Pauli");
    bench->add_option("--copies-n",
                      [&bench_args](const std::vector<std::string>& v) {
                          bench_args.copies_n = std::stoll(v.at(0));
                          return true;
                      },
                      "explicit N for non-Pauli POMs")
        ->type_name("INT");
    bench->add_flag("--no-product-kernel", bench_no_product,
                    "run without the product-structure kernels");
    bench->add_option("--seed", bench_args.base_seed, "base seed for the state draw");
    bench->add_option("--threads", bench_args.threads, "kernel threads");
    bench->add_option("--out", bench_args.out_csv, "benchmark CSV (appended)")
        ->required();

    // validate-pom
    auto* val = app.add_subcommand("validate-pom", "Check POM invariants");
    std::string val_spec;
    val->add_option("spec", val_spec, "POM spec")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            if (sim_mode == "exact") sim_args.plan.mode = tomo::SamplingMode::exact;
            if (sim_mode == "per-setting") {
                sim_args.plan.mode = tomo::SamplingMode::per_setting;
            }
            if (sim_mode == "global") {
                sim_args.plan.mode = tomo::SamplingMode::global;
                if (sim_args.plan.total_shots < 1) {
                    std::cerr << "simulate: global mode needs --total-shots\n";
                    return 1;
                }
            }
            tomo::cmd_simulate(sim_args, std::cout);
        } else if (rec->parsed()) {
            rec_args.cfg.algorithm = *tomo::algorithm_from_string(rec_algorithm);
            rec_args.cfg.use_bb = !rec_no_bb;
            rec_args.product_kernel = !rec_no_product;
            if (rec->count("--target-l-ratio") > 0) {
                rec_args.target_l_ratio = rec_target;
            }
            if (rec->count("--copies-n") > 0) {
                rec_args.copies_override = rec_copies;
            }
            tomo::cmd_reconstruct(rec_args, std::cout);
        } else if (bench->parsed()) {
            bench_args.algorithms = parse_algorithms(bench_algorithms);
            bench_args.solver.use_bb = !bench_no_bb;
            bench_args.product_kernel = !bench_no_product;
            tomo::cmd_benchmark(bench_args, std::cout);
        } else if (val->parsed()) {
            return tomo::cmd_validate_pom(val_spec, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
