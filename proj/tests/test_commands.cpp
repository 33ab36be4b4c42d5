#include "tomo/commands.hpp"

#include "tomo/io.hpp"
#include "tomo/random.hpp"
#include "tomo/states.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tomo;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tomo_cmd_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

int count_lines(const std::string& path) {
    std::ifstream in(path);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

} // namespace

TEST_SUITE_BEGIN("commands");

TEST_CASE("POM spec parsing") {
    CHECK_FALSE(parse_pom_spec("pauli6").is_product());
    CHECK(parse_pom_spec("pauli6").num_outcomes() == 6);
    CHECK(parse_pom_spec("tetrahedron").num_outcomes() == 4);

    const Measurement prod = parse_pom_spec("prod:pauli6:3");
    CHECK(prod.is_product());
    CHECK(prod.dim() == 8);
    CHECK(prod.num_outcomes() == 216);

    CHECK_THROWS_AS(parse_pom_spec("unknown"), std::invalid_argument);
    CHECK_THROWS_AS(parse_pom_spec("prod:pauli6:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_pom_spec("prod:pauli6"), std::invalid_argument);

    TempDir dir;
    write_pom(dir.file("tetra.json"), tetrahedron_register());
    const Measurement from_file = parse_pom_spec("file:" + dir.file("tetra.json"));
    CHECK(from_file.num_outcomes() == 4);

    const Measurement wrapped =
        parse_pom_spec("prod:file:" + dir.file("tetra.json") + ":2");
    CHECK(wrapped.is_product());
    CHECK(wrapped.num_outcomes() == 16);

    // a POM file violating completeness is rejected at parse time
    Pom broken = tetrahedron_register();
    broken.elements.pop_back();
    write_pom(dir.file("broken.json"), broken);
    CHECK_THROWS_AS(parse_pom_spec("file:" + dir.file("broken.json")),
                    std::invalid_argument);
}

TEST_CASE("state spec parsing") {
    const Matrix haar = build_state("haar:5", 4, 0.0);
    CHECK(check_density(haar).ok());
    CHECK((haar - build_state("haar:5", 4, 0.0)).cwiseAbs().maxCoeff() == 0.0);

    const Matrix w = build_state("w", 4, 0.1);
    CHECK(check_density(w).ok());
    CHECK_THROWS_AS(build_state("w", 6, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_state("nope", 4, 0.0), std::invalid_argument);

    TempDir dir;
    write_pure(dir.file("psi.json"), haar_random_pure(4, 8));
    const Matrix from_file = build_state("file:" + dir.file("psi.json"), 4, 0.0);
    CHECK(check_density(from_file).ok());
}

TEST_CASE("default copies rule applies to product-Pauli only") {
    const auto pauli3 = default_copies(parse_pom_spec("prod:pauli6:3"), 100);
    REQUIRE(pauli3.has_value());
    CHECK(*pauli3 == 100 * 27);
    CHECK_FALSE(default_copies(parse_pom_spec("prod:tetrahedron:3"), 100));
    CHECK_FALSE(default_copies(parse_pom_spec("pauli6"), 100));
}

TEST_CASE("simulate command writes exact frequencies and the truth state") {
    TempDir dir;
    SimulateArgs args;
    args.state_spec = "haar:21";
    args.pom_spec = "prod:pauli6:2";
    args.noise = 0.1;
    args.plan.mode = SamplingMode::exact;
    args.counts_out = dir.file("counts.txt");
    args.truth_out = dir.file("truth.json");

    std::ostringstream log;
    cmd_simulate(args, log);
    CHECK(log.str().find("N=exact") != std::string::npos);

    const Frequencies freq = read_counts(dir.file("counts.txt"));
    const Matrix truth = read_density(dir.file("truth.json"));
    const ProbVector p =
        born_probs_product(truth, product_pom(pauli6_register(), 2));
    for (size_t i = 0; i < freq.index.size(); ++i) {
        CHECK(std::abs(freq.freq[i] - p(freq.index[i])) <= 1e-12);
    }
}

TEST_CASE("simulate per-setting is reproducible and counts add up") {
    TempDir dir;
    SimulateArgs args;
    args.state_spec = "w";
    args.pom_spec = "prod:pauli6:2";
    args.plan.mode = SamplingMode::per_setting;
    args.plan.shots_per_setting = 100;
    args.plan.seed = 5;
    args.counts_out = dir.file("a.txt");
    std::ostringstream log;
    cmd_simulate(args, log);
    args.counts_out = dir.file("b.txt");
    cmd_simulate(args, log);

    std::ifstream fa(dir.file("a.txt")), fb(dir.file("b.txt"));
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());

    const Frequencies freq = read_counts(dir.file("a.txt"));
    CHECK(*freq.total_copies == 900);   // 9 settings x 100

    args.pom_spec = "prod:tetrahedron:2";
    args.counts_out = dir.file("c.txt");
    CHECK_THROWS_AS(cmd_simulate(args, log), std::invalid_argument);
}

TEST_CASE("reconstruct command recovers a single-qubit state") {
    TempDir dir;
    Matrix truth = Matrix::Zero(2, 2);
    truth.diagonal() << 0.7, 0.3;
    write_density(dir.file("truth.json"), truth);

    SimulateArgs sim;
    sim.state_spec = "file:" + dir.file("truth.json");
    sim.pom_spec = "pauli6";
    sim.plan.mode = SamplingMode::exact;
    sim.counts_out = dir.file("counts.txt");
    std::ostringstream log;
    cmd_simulate(sim, log);

    for (Algorithm alg :
         {Algorithm::apg, Algorithm::dg, Algorithm::cg, Algorithm::cg_apg}) {
        ReconstructArgs rec;
        rec.counts_path = dir.file("counts.txt");
        rec.pom_spec = "pauli6";
        rec.cfg.algorithm = alg;
        rec.cfg.max_iter = 100000;
        rec.cfg.stall_tol = 1e-15;
        rec.out_state = dir.file("estimate.json");
        rec.out_trace = dir.file("trace.csv");
        std::ostringstream out;
        const ReconstructSummary summary = cmd_reconstruct(rec, out);

        const Matrix estimate = read_density(dir.file("estimate.json"));
        CHECK((estimate - truth).norm() <= 1e-5);
        CHECK(out.str().find("final_F=") != std::string::npos);
        CHECK(out.str().find("eigenvalues=") != std::string::npos);

        // trace rows = iterations + header
        CHECK(count_lines(dir.file("trace.csv")) ==
              static_cast<int>(summary.iterations) + 1);
    }
}

TEST_CASE("reconstruct on single-outcome counts walks to the boundary") {
    TempDir dir;
    {
        std::ofstream out(dir.file("counts.txt"));
        out << "N 100\n0 100\n";   // all clicks on pauli6 z+
    }
    ReconstructArgs rec;
    rec.counts_path = dir.file("counts.txt");
    rec.pom_spec = "pauli6";
    rec.cfg.algorithm = Algorithm::dg;
    rec.cfg.max_iter = 3000;
    rec.out_trace = dir.file("trace.csv");
    std::ostringstream out;
    cmd_reconstruct(rec, out);

    const Frequencies freq = read_counts(dir.file("counts.txt"));
    LikelihoodModel model(freq, pauli6_register());

    // the MLE is |0><0|: the estimate must be closer to it than the start
    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;

    // DG trace is monotone nonincreasing in F
    std::ifstream trace(dir.file("trace.csv"));
    std::string line;
    std::getline(trace, line);
    double prev = std::numeric_limits<double>::infinity();
    while (std::getline(trace, line)) {
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        const size_t c3 = line.find(',', c2 + 1);
        const double f = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
        CHECK(f <= prev + 1e-12);
        prev = f;
    }

    ReconstructArgs apg = rec;
    apg.cfg.algorithm = Algorithm::apg;
    apg.out_state = dir.file("apg.json");
    cmd_reconstruct(apg, out);
    const Matrix estimate = read_density(dir.file("apg.json"));
    CHECK(state_distance(estimate, zero).trace_distance <= 1e-4);
}

TEST_CASE("reconstruct honors the likelihood-ratio target") {
    TempDir dir;
    SimulateArgs sim;
    sim.state_spec = "haar:33";
    sim.pom_spec = "prod:pauli6:2";
    sim.noise = 0.1;
    sim.plan.mode = SamplingMode::exact;
    sim.counts_out = dir.file("counts.txt");
    sim.truth_out = dir.file("truth.json");
    std::ostringstream log;
    cmd_simulate(sim, log);

    ReconstructArgs rec;
    rec.counts_path = dir.file("counts.txt");
    rec.pom_spec = "prod:pauli6:2";
    rec.cfg.algorithm = Algorithm::cg_apg;
    rec.target_l_ratio = 0.999;
    rec.truth_path = dir.file("truth.json");
    std::ostringstream out;
    const ReconstructSummary summary = cmd_reconstruct(rec, out);
    CHECK(summary.status == Status::converged_target);
    REQUIRE(summary.f_target.has_value());
    CHECK(summary.final_f <= *summary.f_target);
    REQUIRE(summary.trace_distance.has_value());
    CHECK(*summary.trace_distance <= 0.05);

    // exact-frequency data without a copies count cannot define the target
    ReconstructArgs no_n = rec;
    no_n.pom_spec = "prod:pauli6:2";
    no_n.truth_path = dir.file("truth.json");
    no_n.copies_override.reset();
    // (product-Pauli default applies, so force a failure with tetrahedron)
    SimulateArgs sim2 = sim;
    sim2.pom_spec = "prod:tetrahedron:2";
    sim2.counts_out = dir.file("counts2.txt");
    cmd_simulate(sim2, log);
    no_n.counts_path = dir.file("counts2.txt");
    no_n.pom_spec = "prod:tetrahedron:2";
    CHECK_THROWS_AS(cmd_reconstruct(no_n, out), std::invalid_argument);
}

TEST_CASE("benchmark command emits one row per run and is reproducible") {
    TempDir dir;
    BenchmarkArgs args;
    args.n_min = 1;
    args.n_max = 1;
    args.states_per_n = 2;
    args.algorithms = {Algorithm::cg_apg, Algorithm::apg, Algorithm::cg,
                       Algorithm::dg};
    args.base_seed = 3;
    args.solver.max_iter = 50000;
    args.out_csv = dir.file("bench.csv");
    std::ostringstream log;
    cmd_benchmark(args, log);

    std::ifstream csv(dir.file("bench.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line ==
          "n,state_seed,algorithm,product_kernel,iterations,seconds,final_F,status");
    std::vector<std::string> rows;
    while (std::getline(csv, line)) rows.push_back(line);
    REQUIRE(rows.size() == 8);
    for (const std::string& row : rows) {
        CHECK(row.find("converged_target") != std::string::npos);
    }

    // second invocation appends; timing-free columns repeat exactly
    cmd_benchmark(args, log);
    std::ifstream csv2(dir.file("bench.csv"));
    std::getline(csv2, line);
    std::vector<std::string> rows2;
    while (std::getline(csv2, line)) rows2.push_back(line);
    REQUIRE(rows2.size() == 16);
    auto strip_time = [](const std::string& row) {
        // drop the seconds column (index 5)
        std::vector<std::string> cols;
        std::stringstream ss(row);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        cols.erase(cols.begin() + 5);
        std::string joined;
        for (const auto& c : cols) joined += c + "|";
        return joined;
    };
    for (int i = 0; i < 8; ++i) {
        CHECK(strip_time(rows2[static_cast<size_t>(i)]) ==
              strip_time(rows2[static_cast<size_t>(i + 8)]));
    }
}

TEST_CASE("validate-pom command") {
    std::ostringstream out;
    CHECK(cmd_validate_pom("pauli6", out) == 0);
    CHECK(out.str().find("completeness_residual=") != std::string::npos);
    CHECK(out.str().find("ok") != std::string::npos);

    TempDir dir;
    Pom broken = pauli6_register();
    broken.elements.pop_back();
    write_pom(dir.file("broken.json"), broken);
    std::ostringstream out2;
    CHECK(cmd_validate_pom("file:" + dir.file("broken.json"), out2) != 0);

    CVector hesse(3);
    hesse << 0.0, M_SQRT1_2, -M_SQRT1_2;
    write_pure(dir.file("hesse.json"), hesse);
    std::ostringstream out3;
    CHECK(cmd_validate_pom("sic:" + dir.file("hesse.json"), out3) == 0);
    CHECK(out3.str().find("sic_overlap_residual=") != std::string::npos);

    std::ostringstream out4;
    CHECK(cmd_validate_pom("prod:pauli6:3", out4) == 0);
    CHECK(out4.str().find("K=216") != std::string::npos);
}

TEST_SUITE_END();
