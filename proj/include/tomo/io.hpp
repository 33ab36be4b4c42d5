#pragma once

#include "tomo/frequencies.hpp"
#include "tomo/pom.hpp"
#include "tomo/solvers.hpp"
#include "tomo/types.hpp"

#include <string>

namespace tomo {

// State files are JSON objects. Density operators carry `dim` and `matrix`
// (d rows of d entries, each a [re, im] pair, row-major); pure states carry
// `dim` and `amplitudes` (d pairs).
void write_density(const std::string& path, const Matrix& rho);
void write_pure(const std::string& path, const CVector& psi);
Matrix read_density(const std::string& path);
CVector read_pure(const std::string& path);
/// Reads either flavor; pure states come back as projectors.
Matrix read_state_as_density(const std::string& path);

// POM files: JSON object {dim, elements: [matrix, ...]}.
void write_pom(const std::string& path, const Pom& pom);
Pom read_pom(const std::string& path);

// Counts files: first line "N <total copies>" or "N exact"; then one line
// "<flattened index> <count or frequency>" per outcome with support, sorted
// by index. Zero-count outcomes are omitted.
void write_counts(const std::string& path, const Frequencies& freq);
Frequencies read_counts(const std::string& path);

/// Trace CSV with header iter,elapsed_s,F,step,restart,phase and F printed
/// to 15 significant digits.
void write_trace_csv(const std::string& path, const SolverTrace& trace);

} // namespace tomo
