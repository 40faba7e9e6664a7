#pragma once

#include <string>
#include <vector>

#include "neumann/density_optimizer.hpp"

namespace neumann {

/// "%.17g": round-trips every double and is locale independent.
std::string format_real(double x);

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One row per trace record: restart, iteration, objective, mass, step,
/// cluster, mu_k, the Strichartz bound 2 pi k^2 / mass and its audit flag,
/// then the cluster eigenvalues padded to the widest record.
CsvTable trace_table(const OptTrace& trace, int k);

}  // namespace neumann
