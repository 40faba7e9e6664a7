#include "neumann/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "neumann/errors.hpp"

namespace neumann {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw SizeError("a table needs at least one column");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw StructuralError("row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << str();
  if (!out.flush()) throw Error("write to " + path + " failed");
}

CsvTable trace_table(const OptTrace& trace, int k) {
  std::size_t width = 1;
  for (const auto& r : trace.records) width = std::max(width, r.eigenvalues.size());
  std::vector<std::string> header = {"restart", "iteration", "objective", "mass", "step",
                                     "cluster", "mu_k", "strichartz_bound", "strichartz_ok"};
  for (std::size_t i = 0; i < width; ++i) header.push_back("eig_" + std::to_string(k + i));
  CsvTable table(std::move(header));
  for (const auto& r : trace.records) {
    const double mu = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front();
    const StrichartzAudit audit = strichartz_audit(r.mass, mu, k);
    std::vector<std::string> cells = {std::to_string(r.restart), std::to_string(r.iteration),
                                      format_real(r.objective), format_real(r.mass),
                                      format_real(r.step), std::to_string(r.cluster),
                                      format_real(mu), format_real(audit.bound / r.mass),
                                      audit.ok ? "1" : "0"};
    for (std::size_t i = 0; i < width; ++i) {
      cells.push_back(i < r.eigenvalues.size() ? format_real(r.eigenvalues[i]) : "");
    }
    table.add_row(std::move(cells));
  }
  return table;
}

}  // namespace neumann
