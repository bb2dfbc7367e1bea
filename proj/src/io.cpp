#include "volterra/io.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "volterra/errors.hpp"

namespace volterra {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) throw IoError(where + ": '" + cell + "' is not a number");
  return v;
}

std::size_t parse_index(double v, std::size_t n, const std::string& where) {
  if (!(v >= 1.0) || v != std::floor(v) || v > static_cast<double>(n)) {
    throw IoError(where + ": cell index " + fmt::format("{}", v) + " outside 1.." + std::to_string(n));
  }
  return static_cast<std::size_t>(v);
}

CsvTable expect_columns(CsvTable t, const std::filesystem::path& path, const std::vector<std::string>& names) {
  if (t.header != names) {
    std::string want;
    for (const auto& n : names) want += (want.empty() ? "" : ",") + n;
    throw IoError(path.string() + ": expected columns " + want);
  }
  return t;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const auto c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto cells = split(content);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() != t.header.size()) {
      throw IoError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                    std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, where));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IoError(source + ": empty CSV");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return parse_csv(ss.str(), path.string());
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += fmt::format("{}", r[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable signal_table(const SampledSignal& s, const std::string& name) {
  CsvTable t{{"t", name}, {}};
  for (std::size_t i = 0; i < s.size(); ++i) t.rows.push_back({s.time(i), s[i]});
  return t;
}

SampledSignal read_signal(const std::filesystem::path& path, const TimeGrid& grid, Placement placement,
                          const std::string& column) {
  const auto t = read_csv(path);
  const auto tc = t.column("t");
  std::size_t vc = 0;
  try {
    vc = t.column(column);
  } catch (const IoError&) {
    throw IoError(path.string() + ": no column '" + column + "'");
  }
  const std::size_t expected = placement == Placement::nodes ? grid.n() + 1 : grid.n();
  if (t.rows.size() != expected) {
    throw IoError(path.string() + ": " + std::to_string(t.rows.size()) + " rows, grid needs " +
                  std::to_string(expected));
  }
  std::vector<double> v(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const double want = placement == Placement::nodes ? grid.node(i) : grid.midpoint(i + 1);
    if (std::abs(t.rows[i][tc] - want) > 1e-9 * grid.h()) {
      throw IoError(path.string() + ": row " + std::to_string(i + 1) + " has t = " + fmt::format("{}", t.rows[i][tc]) +
                    ", grid expects " + fmt::format("{}", want));
    }
    v[i] = t.rows[i][vc];
  }
  return SampledSignal(grid, placement, std::move(v));
}

CsvTable kernel_table(const std::vector<double>& cells) {
  CsvTable t{{"a", "value"}, {}};
  for (std::size_t a = 1; a <= cells.size(); ++a) t.rows.push_back({static_cast<double>(a), cells[a - 1]});
  return t;
}

CsvTable kernel_table(const SymmetricTable2& cells) {
  CsvTable t{{"a", "b", "value"}, {}};
  for (std::size_t a = 1; a <= cells.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b) t.rows.push_back({double(a), double(b), cells(a, b)});
  return t;
}

CsvTable kernel_table(const SymmetricTable3& cells) {
  CsvTable t{{"a", "b", "c", "value"}, {}};
  for (std::size_t a = 1; a <= cells.n(); ++a)
    for (std::size_t b = 1; b <= a; ++b)
      for (std::size_t c = 1; c <= b; ++c) t.rows.push_back({double(a), double(b), double(c), cells(a, b, c)});
  return t;
}

CsvTable kernel_table(const DenseTable2& cells) {
  CsvTable t{{"a", "b", "value"}, {}};
  for (std::size_t a = 1; a <= cells.n(); ++a)
    for (std::size_t b = 1; b <= cells.n(); ++b) t.rows.push_back({double(a), double(b), cells(a, b)});
  return t;
}

std::vector<double> read_kernel1(const std::filesystem::path& path, std::size_t n) {
  const auto t = expect_columns(read_csv(path), path, {"a", "value"});
  std::vector<double> v(n, 0.0);
  std::vector<bool> seen(n, false);
  for (const auto& r : t.rows) {
    const auto a = parse_index(r[0], n, path.string());
    v[a - 1] = r[1];
    seen[a - 1] = true;
  }
  for (std::size_t a = 0; a < n; ++a)
    if (!seen[a]) throw IoError(path.string() + ": cell " + std::to_string(a + 1) + " missing");
  return v;
}

SymmetricTable2 read_kernel2(const std::filesystem::path& path, std::size_t n) {
  const auto t = expect_columns(read_csv(path), path, {"a", "b", "value"});
  if (t.rows.size() != n * (n + 1) / 2) throw IoError(path.string() + ": expected n(n+1)/2 rows for n = " + std::to_string(n));
  SymmetricTable2 k(n);
  for (const auto& r : t.rows) k(parse_index(r[0], n, path.string()), parse_index(r[1], n, path.string())) = r[2];
  return k;
}

SymmetricTable3 read_kernel3(const std::filesystem::path& path, std::size_t n) {
  const auto t = expect_columns(read_csv(path), path, {"a", "b", "c", "value"});
  if (t.rows.size() != n * (n + 1) * (n + 2) / 6) {
    throw IoError(path.string() + ": expected n(n+1)(n+2)/6 rows for n = " + std::to_string(n));
  }
  SymmetricTable3 k(n);
  for (const auto& r : t.rows) {
    k(parse_index(r[0], n, path.string()), parse_index(r[1], n, path.string()), parse_index(r[2], n, path.string())) =
        r[3];
  }
  return k;
}

DenseTable2 read_cross_kernel(const std::filesystem::path& path, std::size_t n) {
  const auto t = expect_columns(read_csv(path), path, {"a", "b", "value"});
  if (t.rows.size() != n * n) throw IoError(path.string() + ": expected n^2 rows for n = " + std::to_string(n));
  DenseTable2 k(n);
  for (const auto& r : t.rows) k(parse_index(r[0], n, path.string()), parse_index(r[1], n, path.string())) = r[2];
  return k;
}

void OutputSet::add(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

void OutputSet::commit() {
  namespace fs = std::filesystem;
  written_.clear();
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());

  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files_) {
    const auto tmp = dir_ / (name + ".partial");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) staged.push_back(tmp);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw IoError("cannot write " + (dir_ / name).string());
    }
  }
  for (const auto& [name, content] : files_) {
    if (fs::is_directory(dir_ / name)) {
      cleanup();
      throw IoError("cannot replace directory " + (dir_ / name).string());
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    const auto target = dir_ / files_[i].first;
    fs::rename(staged[i], target, ec);
    if (ec) {
      const auto reason = ec.message();
      cleanup();
      for (const auto& p : written_) fs::remove(p, ec);
      written_.clear();
      throw IoError("cannot move " + target.string() + " into place: " + reason);
    }
    written_.push_back(target);
  }
  files_.clear();
}

}  // namespace volterra
