#include "tomo/commands.hpp"

#include "tomo/io.hpp"
#include "tomo/states.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace tomo {

namespace {

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": bad integer '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": bad integer '" + s + "'");
    }
}

bool same_pom(const Pom& a, const Pom& b, double tol = 1e-12) {
    if (a.dim != b.dim || a.size() != b.size()) return false;
    for (size_t k = 0; k < a.elements.size(); ++k) {
        if ((a.elements[k] - b.elements[k]).cwiseAbs().maxCoeff() > tol) {
            return false;
        }
    }
    return true;
}

} // namespace

Index Measurement::dim() const {
    return is_product() ? std::get<ProductPom>(value).dim()
                        : std::get<Pom>(value).dim;
}

Index Measurement::num_outcomes() const {
    return is_product() ? std::get<ProductPom>(value).num_outcomes()
                        : std::get<Pom>(value).size();
}

LikelihoodModel Measurement::model(Frequencies freq, bool product_kernel,
                                   int threads) const {
    if (is_product()) {
        LikelihoodModel m(std::move(freq), std::get<ProductPom>(value),
                          product_kernel);
        m.threads = threads;
        return m;
    }
    LikelihoodModel m(std::move(freq), std::get<Pom>(value));
    m.threads = threads;
    return m;
}

Measurement parse_pom_spec(const std::string& spec) {
    if (starts_with(spec, "prod:")) {
        const std::string inner = spec.substr(5);
        const size_t colon = inner.rfind(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument(
                "POM spec: product wrapper must be prod:<register spec>:<n>");
        }
        const int n = parse_int(inner.substr(colon + 1), "POM spec");
        if (n < 1) {
            throw std::invalid_argument("POM spec: register count must be >= 1");
        }
        Measurement reg = parse_pom_spec(inner.substr(0, colon));
        if (reg.is_product()) {
            throw std::invalid_argument("POM spec: nested product wrappers");
        }
        return {product_pom(std::get<Pom>(reg.value), n)};
    }
    if (spec == "pauli6") return {pauli6_register()};
    if (spec == "tetrahedron") return {tetrahedron_register()};
    if (starts_with(spec, "sic:")) {
        const CVector fiducial = read_pure(spec.substr(4));
        return {sic_from_fiducial(fiducial)};
    }
    if (starts_with(spec, "file:")) {
        Pom pom = read_pom(spec.substr(5));
        const PomReport report = validate_pom(pom);
        if (!report.ok()) {
            std::ostringstream msg;
            msg << "POM file " << spec.substr(5)
                << " violates POM invariants (completeness residual "
                << report.completeness_residual << ", min eigenvalue "
                << report.min_eigenvalue << ")";
            throw std::invalid_argument(msg.str());
        }
        return {std::move(pom)};
    }
    throw std::invalid_argument("unknown POM spec '" + spec + "'");
}

Matrix build_state(const std::string& spec, Index dim, double noise) {
    Matrix rho;
    if (starts_with(spec, "haar:")) {
        const std::uint64_t seed = parse_u64(spec.substr(5), "state spec");
        rho = pure_to_density(haar_random_pure(dim, seed));
    } else if (spec == "w" || spec == "ghz") {
        int n = 0;
        while ((Index{1} << n) < dim) ++n;
        if ((Index{1} << n) != dim) {
            throw std::invalid_argument(
                "state spec: '" + spec + "' needs a power-of-two dimension");
        }
        rho = pure_to_density(spec == "w" ? w_state(n) : ghz_state(n));
    } else if (starts_with(spec, "file:")) {
        rho = read_state_as_density(spec.substr(5));
        if (rho.rows() != dim) {
            throw std::invalid_argument("state spec: file dimension mismatch");
        }
        const DensityCheck check = check_density(rho);
        if (!check.ok()) {
            throw std::invalid_argument("state spec: file is not a valid state");
        }
    } else {
        throw std::invalid_argument("unknown state spec '" + spec + "'");
    }
    return add_white_noise(rho, noise);
}

namespace {

ProbVector probs_for(const Measurement& m, const Matrix& rho, bool product_kernel,
                     int threads) {
    if (m.is_product()) {
        const ProductPom& pom = std::get<ProductPom>(m.value);
        return product_kernel ? born_probs_product(rho, pom, threads)
                              : born_probs_unstructured(rho, pom, threads);
    }
    return born_probs_dense(rho, std::get<Pom>(m.value));
}

} // namespace

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
    const Measurement m = parse_pom_spec(args.pom_spec);
    const Matrix rho = build_state(args.state_spec, m.dim(), args.noise);
    const ProbVector p = probs_for(m, rho, true, args.threads);

    Frequencies freq;
    switch (args.plan.mode) {
        case SamplingMode::exact:
            freq = simulate_exact(p);
            break;
        case SamplingMode::per_setting: {
            if (!m.is_product()) {
                throw std::invalid_argument(
                    "simulate: per-setting sampling needs a product POM");
            }
            freq = simulate_per_setting(p, std::get<ProductPom>(m.value),
                                        args.plan.shots_per_setting,
                                        args.plan.seed);
            break;
        }
        case SamplingMode::global:
            freq = simulate_global(p, args.plan.total_shots, args.plan.seed);
            break;
    }

    write_counts(args.counts_out, freq);
    out << "counts=" << args.counts_out << "\n";
    if (freq.total_copies) {
        out << "N=" << *freq.total_copies << "\n";
    } else {
        out << "N=exact\n";
    }
    out << "support=" << freq.support_size() << "\n";
    if (!args.truth_out.empty()) {
        write_density(args.truth_out, rho);
        out << "truth=" << args.truth_out << "\n";
    }
}

std::optional<std::int64_t> default_copies(const Measurement& m,
                                           std::int64_t shots_per_setting) {
    if (!m.is_product()) return std::nullopt;
    const ProductPom& pom = std::get<ProductPom>(m.value);
    const Pom reference = pauli6_register();
    std::int64_t settings = 1;
    for (const Pom& reg : pom.registers) {
        if (!same_pom(reg, reference)) return std::nullopt;
        settings *= 3;
    }
    return shots_per_setting * settings;
}

ReconstructSummary cmd_reconstruct(const ReconstructArgs& args, std::ostream& out) {
    const Measurement m = parse_pom_spec(args.pom_spec);
    Frequencies freq = read_counts(args.counts_path);
    freq.validate(m.num_outcomes());

    SolverConfig cfg = args.cfg;
    std::optional<Matrix> truth;
    if (!args.truth_path.empty()) {
        truth = read_state_as_density(args.truth_path);
        if (truth->rows() != m.dim()) {
            throw std::invalid_argument("reconstruct: truth dimension mismatch");
        }
    }

    const LikelihoodModel model =
        m.model(freq, args.product_kernel, args.threads);

    if (args.target_l_ratio) {
        if (!(*args.target_l_ratio > 0.0 && *args.target_l_ratio <= 1.0)) {
            throw std::invalid_argument("reconstruct: target L ratio must be in (0,1]");
        }
        if (!truth) {
            throw std::invalid_argument(
                "reconstruct: --target-l-ratio needs --truth to locate F at the target state");
        }
        std::optional<std::int64_t> copies = model.freq().total_copies;
        if (args.copies_override) copies = args.copies_override;
        if (!copies) copies = default_copies(m, 100);
        if (!copies) {
            throw std::invalid_argument(
                "reconstruct: exact-frequency data needs --copies-n to define the L ratio target");
        }
        const double f_true = model.nll(model.probs(*truth));
        cfg.f_target =
            f_true - std::log(*args.target_l_ratio) / static_cast<double>(*copies);
    }

    const SolverResult result = solve(model, cfg);

    const EigenSystem es = eigh_descending(result.rho_hat);
    ReconstructSummary summary;
    summary.status = result.trace.status;
    summary.iterations = result.trace.records.back().iter;
    summary.final_f = result.best_f;
    summary.elapsed_s = result.trace.records.back().elapsed_s;
    summary.eigenvalues = es.values;
    summary.f_target = cfg.f_target;
    if (truth) {
        summary.trace_distance = state_distance(result.rho_hat, *truth).trace_distance;
    }

    if (!args.out_state.empty()) {
        write_density(args.out_state, result.rho_hat);
    }
    if (!args.out_trace.empty()) {
        write_trace_csv(args.out_trace, result.trace);
    }

    char buf[64];
    out << "status=" << to_string(summary.status) << "\n";
    out << "iterations=" << summary.iterations << "\n";
    std::snprintf(buf, sizeof buf, "%.15g", summary.final_f);
    out << "final_F=" << buf << "\n";
    if (summary.f_target) {
        std::snprintf(buf, sizeof buf, "%.15g", *summary.f_target);
        out << "f_target=" << buf << "\n";
    }
    if (summary.trace_distance) {
        std::snprintf(buf, sizeof buf, "%.6g", *summary.trace_distance);
        out << "trace_distance_to_truth=" << buf << "\n";
    }
    out << "eigenvalues=";
    const Index shown = std::min<Index>(summary.eigenvalues.size(), 12);
    for (Index i = 0; i < shown; ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", summary.eigenvalues(i));
        out << (i ? " " : "") << buf;
    }
    out << "\n";
    return summary;
}

void cmd_benchmark(const BenchmarkArgs& args, std::ostream& out) {
    if (args.n_min < 1 || args.n_max < args.n_min) {
        throw std::invalid_argument("benchmark: bad qubit range");
    }
    if (args.states_per_n < 1) {
        throw std::invalid_argument("benchmark: states per n must be >= 1");
    }
    const Measurement reg = parse_pom_spec(args.register_pom_spec);
    if (reg.is_product()) {
        throw std::invalid_argument(
            "benchmark: pass a register POM spec; the product over n is built per run");
    }

    const bool fresh = !std::filesystem::exists(args.out_csv) ||
                       std::filesystem::file_size(args.out_csv) == 0;
    std::ofstream csv(args.out_csv, std::ios::app);
    if (!csv) {
        throw std::runtime_error("cannot write " + args.out_csv);
    }
    if (fresh) {
        csv << "n,state_seed,algorithm,product_kernel,iterations,seconds,final_F,status\n";
    }

    char buf[64];
    for (int n = args.n_min; n <= args.n_max; ++n) {
        const Measurement m{product_pom(std::get<Pom>(reg.value), n)};
        std::optional<std::int64_t> copies = args.copies_n;
        if (!copies) copies = default_copies(m, args.shots_per_setting);
        if (!copies) {
            throw std::invalid_argument(
                "benchmark: this POM needs an explicit --copies-n for the L ratio target");
        }

        for (int idx = 0; idx < args.states_per_n; ++idx) {
            const std::uint64_t seed =
                args.base_seed + static_cast<std::uint64_t>(n) * 1000 +
                static_cast<std::uint64_t>(idx);
            const Matrix rho_true = add_white_noise(
                pure_to_density(haar_random_pure(m.dim(), seed)), args.noise);
            const ProbVector p = probs_for(m, rho_true, true, args.threads);
            const Frequencies freq = simulate_exact(p);

            const LikelihoodModel model =
                m.model(freq, args.product_kernel, args.threads);
            const double f_true = model.nll(p);
            const double f_target =
                f_true - std::log(args.target_ratio) / static_cast<double>(*copies);

            for (Algorithm alg : args.algorithms) {
                SolverConfig cfg = args.solver;
                cfg.algorithm = alg;
                cfg.f_target = f_target;

                const SolverResult result = solve(model, cfg);
                const TraceRecord& last = result.trace.records.back();
                const double seconds = result.trace.status == Status::time_out
                                           ? cfg.time_budget_s
                                           : last.elapsed_s;
                std::snprintf(buf, sizeof buf, "%.15g", result.best_f);
                csv << n << "," << seed << "," << to_string(alg) << ","
                    << (args.product_kernel ? 1 : 0) << "," << last.iter << ","
                    << seconds << "," << buf << ","
                    << to_string(result.trace.status) << "\n";
                csv.flush();
                out << "n=" << n << " seed=" << seed << " " << to_string(alg)
                    << " " << to_string(result.trace.status) << " iters="
                    << last.iter << " t=" << seconds << "s\n";
            }
        }
    }
}

namespace {

bool report_plain_pom(const Pom& pom, std::ostream& out) {
    const PomReport report = validate_pom(pom);
    out << "dim=" << pom.dim << " K=" << pom.size() << "\n"
        << "completeness_residual=" << report.completeness_residual << "\n"
        << "min_eigenvalue=" << report.min_eigenvalue << "\n"
        << "hermiticity_residual=" << report.hermiticity_residual << "\n";
    return report.ok();
}

} // namespace

int cmd_validate_pom(const std::string& spec, std::ostream& out) {
    bool ok = true;
    try {
        if (starts_with(spec, "prod:")) {
            const Measurement m = parse_pom_spec(spec);
            const ProductPom& pom = std::get<ProductPom>(m.value);
            out << "product POM: n=" << pom.n()
                << " register_dim=" << pom.register_dim()
                << " dim=" << pom.dim() << " K=" << pom.num_outcomes() << "\n";
            for (int a = 0; a < pom.n(); ++a) {
                const PomReport report =
                    validate_pom(pom.registers[static_cast<size_t>(a)]);
                out << "register " << (a + 1)
                    << ": completeness_residual=" << report.completeness_residual
                    << " min_eigenvalue=" << report.min_eigenvalue
                    << " hermiticity_residual=" << report.hermiticity_residual
                    << "\n";
                ok = ok && report.ok();
            }
        } else if (starts_with(spec, "sic:")) {
            const CVector fiducial = read_pure(spec.substr(4));
            SicReport sic{0.0};
            try {
                const Pom pom = sic_from_fiducial(fiducial, 1e-6, &sic);
                out << "sic_overlap_residual=" << sic.overlap_residual << "\n";
                ok = report_plain_pom(pom, out);
            } catch (const std::invalid_argument&) {
                out << "sic_overlap_residual=" << sic.overlap_residual << "\n";
                ok = false;
            }
        } else if (starts_with(spec, "file:")) {
            ok = report_plain_pom(read_pom(spec.substr(5)), out);
        } else {
            const Measurement m = parse_pom_spec(spec);
            ok = report_plain_pom(std::get<Pom>(m.value), out);
        }
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return 2;
    }
    out << (ok ? "ok" : "violation") << "\n";
    return ok ? 0 : 1;
}

} // namespace tomo
