#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace repvis {

/// Column-major numeric table with named columns.  Values are doubles;
/// grouping columns (ids, periods) hold exact small integers.  Lookup of a
/// missing column throws std::invalid_argument naming it, which the CLI maps
/// to the input-error exit code.
class Dataset {
 public:
  Dataset() = default;

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool has_column(const std::string& name) const;

  void add_column(const std::string& name, std::vector<double> values);
  const std::vector<double>& column(const std::string& name) const;
  std::vector<double>& column(const std::string& name);

  Dataset filter(const std::function<bool(std::size_t)>& keep_row) const;
  Dataset select(const std::vector<std::string>& names) const;

  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
  static Dataset read_csv(std::istream& is);
  static Dataset read_csv_file(const std::string& path);

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
  std::size_t n_rows_ = 0;
};

}  // namespace repvis
