#include "qsvm/qubo_io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace qsvm {

void write_qubo_text(std::ostream& out, const QuboMatrix& q) {
  check_qubo(q);
  out << q.rows() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (j) out << ' ';
      out << q(i, j);
    }
    out << '\n';
  }
}

QuboMatrix read_qubo_text(std::istream& in) {
  long dim = 0;
  if (!(in >> dim) || dim < 1) throw std::invalid_argument("QUBO text: missing or invalid dimension line");
  QuboMatrix q(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      if (!(in >> q(i, j))) {
        throw std::invalid_argument("QUBO text: expected " + std::to_string(dim * dim) +
                                    " entries, failed at row " + std::to_string(i));
      }
    }
  }
  std::string extra;
  if (in >> extra) throw std::invalid_argument("QUBO text: trailing data after matrix");
  check_qubo(q);
  return q;
}

nlohmann::json qubo_to_json(const QuboMatrix& q) {
  check_qubo(q);
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<double> row(q.cols());
    for (Eigen::Index j = 0; j < q.cols(); ++j) row[j] = q(i, j);
    rows.push_back(row);
  }
  return {{"dim", q.rows()}, {"entries", rows}};
}

QuboMatrix qubo_from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<long>();
  const auto& rows = j.at("entries");
  if (dim < 1 || !rows.is_array() || static_cast<long>(rows.size()) != dim) {
    throw std::invalid_argument("QUBO JSON: entries must hold 'dim' rows");
  }
  QuboMatrix q(dim, dim);
  for (long i = 0; i < dim; ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (static_cast<long>(row.size()) != dim) throw std::invalid_argument("QUBO JSON: ragged row " + std::to_string(i));
    for (long c = 0; c < dim; ++c) q(i, c) = row[c];
  }
  check_qubo(q);
  return q;
}

QuboMatrix load_qubo(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return qubo_from_json(nlohmann::json::parse(text));
  std::istringstream in(text);
  return read_qubo_text(in);
}

nlohmann::json solve_result_to_json(const SolveResult& r) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& s : r.ranked) ranked.push_back({{"bits", to_string(s.bits)}, {"energy", s.energy}});
  return {{"best", to_string(r.best)}, {"energy", r.energy}, {"ranked", ranked}};
}

}  // namespace qsvm
