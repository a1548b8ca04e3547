#include "repvis/dataset.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "repvis/util.hpp"

namespace repvis {

std::size_t Dataset::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw std::invalid_argument("missing required column: " + name);
}

bool Dataset::has_column(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

void Dataset::add_column(const std::string& name, std::vector<double> values) {
  if (has_column(name)) throw std::invalid_argument("duplicate column: " + name);
  if (!names_.empty() && values.size() != n_rows_)
    throw std::invalid_argument("column " + name + " has mismatched length");
  n_rows_ = values.size();
  names_.push_back(name);
  cols_.push_back(std::move(values));
}

const std::vector<double>& Dataset::column(const std::string& name) const {
  return cols_[index_of(name)];
}

std::vector<double>& Dataset::column(const std::string& name) {
  return cols_[index_of(name)];
}

Dataset Dataset::filter(const std::function<bool(std::size_t)>& keep_row) const {
  std::vector<std::size_t> keep;
  keep.reserve(n_rows_);
  for (std::size_t r = 0; r < n_rows_; ++r)
    if (keep_row(r)) keep.push_back(r);
  Dataset out;
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    std::vector<double> col;
    col.reserve(keep.size());
    for (std::size_t r : keep) col.push_back(cols_[c][r]);
    out.add_column(names_[c], std::move(col));
  }
  out.n_rows_ = keep.size();
  return out;
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
  Dataset out;
  for (const auto& n : names) out.add_column(n, column(n));
  return out;
}

void Dataset::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < names_.size(); ++c)
    os << names_[c] << (c + 1 == names_.size() ? '\n' : ',');
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (std::size_t c = 0; c < cols_.size(); ++c)
      os << format_double(cols_[c][r]) << (c + 1 == cols_.size() ? '\n' : ',');
}

void Dataset::write_csv_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);  // LF line endings on all hosts
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(os);
}

Dataset Dataset::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, ',');

  std::vector<std::vector<double>> cols(header.size());
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size())
      throw std::invalid_argument("CSV row " + std::to_string(rows + 2) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = trim(cells[c]);
      cols[c].push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : parse_double(cell));
    }
    ++rows;
  }
  Dataset out;
  for (std::size_t c = 0; c < header.size(); ++c)
    out.add_column(std::string(trim(header[c])), std::move(cols[c]));
  return out;
}

Dataset Dataset::read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open CSV: " + path);
  return read_csv(is);
}

}  // namespace repvis
