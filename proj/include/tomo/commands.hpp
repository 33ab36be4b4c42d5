#pragma once

#include "tomo/likelihood.hpp"
#include "tomo/sampling.hpp"
#include "tomo/solvers.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tomo {

/// A parsed measurement specification. Spec strings: `pauli6`, `tetrahedron`,
/// `sic:<fiducial file>`, `file:<pom file>`, and the product wrapper
/// `prod:<register spec>:<n>`.
struct Measurement {
    std::variant<Pom, ProductPom> value;

    bool is_product() const { return std::holds_alternative<ProductPom>(value); }
    Index dim() const;
    Index num_outcomes() const;
    LikelihoodModel model(Frequencies freq, bool product_kernel, int threads) const;
};

Measurement parse_pom_spec(const std::string& spec);

/// Builds the (possibly noisy) true state for a spec string: `haar:<seed>`,
/// `w`, `ghz`, or `file:<path>`. Noise is the depolarizing fraction.
Matrix build_state(const std::string& spec, Index dim, double noise);

struct SimulateArgs {
    std::string state_spec;
    std::string pom_spec;
    double noise = 0.0;
    SamplingPlan plan;
    std::string counts_out;
    std::string truth_out;   // optional
    int threads = 1;
};
void cmd_simulate(const SimulateArgs& args, std::ostream& out);

struct ReconstructArgs {
    std::string counts_path;
    std::string pom_spec;
    SolverConfig cfg;
    bool product_kernel = true;
    int threads = 1;
    std::optional<double> target_l_ratio;
    std::string truth_path;                       // optional
    std::optional<std::int64_t> copies_override;  // N for exact-frequency targets
    std::string out_state;   // optional
    std::string out_trace;   // optional
};

struct ReconstructSummary {
    Status status;
    std::int64_t iterations;
    double final_f;
    double elapsed_s;
    RVector eigenvalues;                    // descending
    std::optional<double> f_target;
    std::optional<double> trace_distance;   // vs truth when provided
};
ReconstructSummary cmd_reconstruct(const ReconstructArgs& args, std::ostream& out);

struct BenchmarkArgs {
    int n_min = 1;
    int n_max = 4;
    int states_per_n = 50;
    double noise = 0.1;
    std::string register_pom_spec = "pauli6";
    std::vector<Algorithm> algorithms = {Algorithm::cg_apg, Algorithm::apg,
                                         Algorithm::cg, Algorithm::dg};
    double target_ratio = 0.999;
    std::int64_t shots_per_setting = 100;         // fixes N for product-Pauli
    std::optional<std::int64_t> copies_n;         // explicit N otherwise
    bool product_kernel = true;
    std::uint64_t base_seed = 0;
    int threads = 1;
    SolverConfig solver;   // algorithm field is overridden per run
    std::string out_csv;
};
void cmd_benchmark(const BenchmarkArgs& args, std::ostream& out);

/// Prints the validation report; returns a nonzero exit code on violation.
int cmd_validate_pom(const std::string& spec, std::ostream& out);

/// Effective copies count N for an exact-frequency target on this
/// measurement: shots * 3^n for product-Pauli, otherwise empty.
std::optional<std::int64_t> default_copies(const Measurement& m,
                                           std::int64_t shots_per_setting);

} // namespace tomo
