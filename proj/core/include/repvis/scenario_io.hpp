#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repvis/econometrics.hpp"
#include "repvis/model.hpp"
#include "repvis/simulate.hpp"

namespace repvis {

/// Flat key-value document with [section] headers, `key = value` lines and
/// `#` comments.  Keys keep insertion order so serialization is stable;
/// doubles are written with shortest round-trip formatting, so
/// parse(serialize(x)) reproduces every value bit-exactly.
class ConfigDoc {
 public:
  static ConfigDoc parse(const std::string& text);
  static ConfigDoc load_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  const std::string& get(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key) const;
  long get_int_or(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  /// Applies a "section.key=value" override (the CLI --set flag).
  void set_dotted(const std::string& assignment);

  std::string serialize() const;
  std::uint64_t fingerprint() const;

 private:
  struct Entry {
    std::string section, key, value;
  };
  std::vector<Entry> entries_;
};

/// Scenario sections: [risky], [safe], [signal], [visibility.risky],
/// [visibility.safe], [value].  See configs/ for commented examples.
Scenario scenario_from_config(const ConfigDoc& doc);
/// Emits exactly the sections scenario_from_config reads; round-trips
/// bit-exactly for every kernel and value variant.
ConfigDoc scenario_to_config(const Scenario& scenario);

/// [reform] section: constant shift levels.
ReformShift reform_from_config(const ConfigDoc& doc);

/// [simulation] section plus the scenario and reform sections.
SimConfig sim_config_from_config(const ConfigDoc& doc);

/// [estimation] section; all keys optional with the documented defaults.
RegressionSpec estimation_spec_from_config(const ConfigDoc& doc);

/// Whether estimation restricts to surviving rows (the public record);
/// defaults to true.
bool estimation_visible_only(const ConfigDoc& doc);

std::size_t estimation_min_cell(const ConfigDoc& doc);

}  // namespace repvis
