#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>

#include "qsvm/qubo.hpp"

namespace qsvm {

// Plain-text form: first line D, then D rows of D whitespace-separated values.
void write_qubo_text(std::ostream& out, const QuboMatrix& q);
QuboMatrix read_qubo_text(std::istream& in);

// JSON form: { "dim": D, "entries": [[...], ...] }.
nlohmann::json qubo_to_json(const QuboMatrix& q);
QuboMatrix qubo_from_json(const nlohmann::json& j);

/// Loads either format, picking JSON when the file starts with '{'.
QuboMatrix load_qubo(const std::filesystem::path& path);

nlohmann::json solve_result_to_json(const SolveResult& r);

}  // namespace qsvm
