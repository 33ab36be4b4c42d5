#include "tomo/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tomo {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            row.push_back({m(i, j).real(), m(i, j).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, Index dim, const std::string& what) {
    if (!rows.is_array() || static_cast<Index>(rows.size()) != dim) {
        throw std::runtime_error(what + ": expected " + std::to_string(dim) + " rows");
    }
    Matrix m(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        const json& row = rows[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != dim) {
            throw std::runtime_error(what + ": bad row length");
        }
        for (Index j = 0; j < dim; ++j) {
            const json& e = row[static_cast<size_t>(j)];
            if (!e.is_array() || e.size() != 2) {
                throw std::runtime_error(what + ": entries must be [re, im] pairs");
            }
            m(i, j) = Cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << j.dump(1) << "\n";
}

Index get_dim(const json& j, const std::string& path) {
    if (!j.contains("dim") || !j["dim"].is_number_integer()) {
        throw std::runtime_error(path + ": missing integer field 'dim'");
    }
    const Index dim = j["dim"].get<Index>();
    if (dim < 1) {
        throw std::runtime_error(path + ": dim must be >= 1");
    }
    return dim;
}

} // namespace

void write_density(const std::string& path, const Matrix& rho) {
    json j;
    j["dim"] = rho.rows();
    j["matrix"] = matrix_to_json(rho);
    save_json(path, j);
}

void write_pure(const std::string& path, const CVector& psi) {
    json amps = json::array();
    for (Index i = 0; i < psi.size(); ++i) {
        amps.push_back({psi(i).real(), psi(i).imag()});
    }
    json j;
    j["dim"] = psi.size();
    j["amplitudes"] = std::move(amps);
    save_json(path, j);
}

Matrix read_density(const std::string& path) {
    const json j = load_json(path);
    const Index dim = get_dim(j, path);
    if (!j.contains("matrix")) {
        throw std::runtime_error(path + ": missing field 'matrix'");
    }
    return matrix_from_json(j["matrix"], dim, path);
}

CVector read_pure(const std::string& path) {
    const json j = load_json(path);
    const Index dim = get_dim(j, path);
    if (!j.contains("amplitudes")) {
        throw std::runtime_error(path + ": missing field 'amplitudes'");
    }
    const json& amps = j["amplitudes"];
    if (!amps.is_array() || static_cast<Index>(amps.size()) != dim) {
        throw std::runtime_error(path + ": expected " + std::to_string(dim) +
                                 " amplitudes");
    }
    CVector psi(dim);
    for (Index i = 0; i < dim; ++i) {
        const json& e = amps[static_cast<size_t>(i)];
        if (!e.is_array() || e.size() != 2) {
            throw std::runtime_error(path + ": amplitudes must be [re, im] pairs");
        }
        psi(i) = Cplx(e[0].get<double>(), e[1].get<double>());
    }
    return psi;
}

Matrix read_state_as_density(const std::string& path) {
    const json j = load_json(path);
    if (j.contains("matrix")) {
        return read_density(path);
    }
    if (j.contains("amplitudes")) {
        const CVector psi = read_pure(path);
        return psi * psi.adjoint();
    }
    throw std::runtime_error(path + ": neither 'matrix' nor 'amplitudes' present");
}

void write_pom(const std::string& path, const Pom& pom) {
    json elems = json::array();
    for (const Matrix& e : pom.elements) {
        elems.push_back(matrix_to_json(e));
    }
    json j;
    j["dim"] = pom.dim;
    j["elements"] = std::move(elems);
    save_json(path, j);
}

Pom read_pom(const std::string& path) {
    const json j = load_json(path);
    Pom pom;
    pom.dim = get_dim(j, path);
    if (!j.contains("elements") || !j["elements"].is_array() ||
        j["elements"].empty()) {
        throw std::runtime_error(path + ": missing nonempty array 'elements'");
    }
    for (const json& e : j["elements"]) {
        pom.elements.push_back(matrix_from_json(e, pom.dim, path));
    }
    return pom;
}

void write_counts(const std::string& path, const Frequencies& freq) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    char buf[64];
    if (freq.total_copies) {
        out << "N " << *freq.total_copies << "\n";
        for (size_t i = 0; i < freq.index.size(); ++i) {
            out << freq.index[i] << " " << freq.counts[i] << "\n";
        }
    } else {
        out << "N exact\n";
        for (size_t i = 0; i < freq.index.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", freq.freq[i]);
            out << freq.index[i] << " " << buf << "\n";
        }
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

Frequencies read_counts(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty counts file");
    }
    std::istringstream header(line);
    std::string tag, n_field;
    if (!(header >> tag >> n_field) || tag != "N") {
        throw std::runtime_error(path + ": first line must be 'N <copies>' or 'N exact'");
    }

    const bool exact = (n_field == "exact");
    std::int64_t declared = 0;
    if (!exact) {
        try {
            declared = std::stoll(n_field);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": bad total-copies value '" + n_field + "'");
        }
        if (declared <= 0) {
            throw std::runtime_error(path + ": total copies must be positive");
        }
    }

    std::vector<Index> index;
    std::vector<double> values;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        Index k;
        double v;
        if (!(row >> k >> v)) {
            throw std::runtime_error(path + ": malformed line " + std::to_string(line_no));
        }
        index.push_back(k);
        values.push_back(v);
    }

    if (exact) {
        Frequencies freq = Frequencies::exact(std::move(index), std::move(values));
        freq.validate();
        return freq;
    }
    std::vector<std::int64_t> counts(values.size());
    std::int64_t total = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        counts[i] = static_cast<std::int64_t>(values[i]);
        if (static_cast<double>(counts[i]) != values[i] || counts[i] < 0) {
            throw std::runtime_error(path + ": counts must be nonnegative integers");
        }
        total += counts[i];
    }
    if (total != declared) {
        throw std::runtime_error(path + ": counts sum to " + std::to_string(total) +
                                 " but N declares " + std::to_string(declared));
    }
    Frequencies freq = Frequencies::from_counts(std::move(index), std::move(counts));
    freq.validate();
    return freq;
}

void write_trace_csv(const std::string& path, const SolverTrace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "iter,elapsed_s,F,step,restart,phase\n";
    char buf[256];
    for (const TraceRecord& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%" PRId64 ",%.6f,%.15g,%.9g,%d,%s\n",
                      static_cast<std::int64_t>(r.iter), r.elapsed_s, r.f,
                      r.step, r.restarted ? 1 : 0, to_string(r.phase).c_str());
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

} // namespace tomo
