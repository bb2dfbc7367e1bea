#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/kernels.hpp"
#include "volterra/simulation.hpp"

namespace volterra {

/// Numeric CSV with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws IoError when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Parses CSV text; `source` names the origin in error messages.
CsvTable parse_csv(const std::string& text, const std::string& source);
/// Throws IoError for unreadable files and malformed rows.
CsvTable read_csv(const std::filesystem::path& path);
/// Shortest round-trip formatting of every value.
std::string format_csv(const CsvTable& table);

/// Columns t, value.
CsvTable signal_table(const SampledSignal& s, const std::string& name = "value");
/// Reads a t,value (or named column) file onto `grid`. The time column must
/// match the placement within 1e-9 h.
SampledSignal read_signal(const std::filesystem::path& path, const TimeGrid& grid, Placement placement,
                          const std::string& column = "value");

// Kernel tables, 1-based cell indices: K1 "a,value", symmetric K2 "a,b,value"
// (a >= b), symmetric K3 "a,b,c,value" (a >= b >= c), cross "a,b,value".
CsvTable kernel_table(const std::vector<double>& cells);
CsvTable kernel_table(const SymmetricTable2& cells);
CsvTable kernel_table(const SymmetricTable3& cells);
CsvTable kernel_table(const DenseTable2& cells);
std::vector<double> read_kernel1(const std::filesystem::path& path, std::size_t n);
SymmetricTable2 read_kernel2(const std::filesystem::path& path, std::size_t n);
SymmetricTable3 read_kernel3(const std::filesystem::path& path, std::size_t n);
DenseTable2 read_cross_kernel(const std::filesystem::path& path, std::size_t n);

/// Files written together: contents are staged in memory and `commit` writes
/// each to a temporary sibling, then renames all of them. On failure the
/// temporaries are removed and no target is touched.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content);
  void add(const std::string& name, const CsvTable& table) { add(name, format_csv(table)); }
  /// Paths written by the last commit.
  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }
  void commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::filesystem::path> written_;
};

}  // namespace volterra
