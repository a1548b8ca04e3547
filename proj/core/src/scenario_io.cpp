#include "repvis/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "repvis/util.hpp"

namespace repvis {

namespace {

std::string list_to_string(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

[[noreturn]] void fail_key(const std::string& section, const std::string& key,
                           const std::string& why) {
  throw std::invalid_argument("config key [" + section + "] " + key + ": " + why);
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (section.empty())
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": empty section name");
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    doc.set(section, key, value);
  }
  return doc;
}

ConfigDoc ConfigDoc::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse(buf.str());
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  return find(section, key).has_value();
}

bool ConfigDoc::has_section(const std::string& section) const {
  for (const auto& e : entries_)
    if (e.section == section) return true;
  return false;
}

const std::string& ConfigDoc::get(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return e.value;
  throw std::invalid_argument("missing config key [" + section + "] " + key);
}

std::optional<std::string> ConfigDoc::find(const std::string& section,
                                           const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return e.value;
  return std::nullopt;
}

double ConfigDoc::get_double(const std::string& section, const std::string& key) const {
  try {
    return parse_double(get(section, key));
  } catch (const std::invalid_argument& ex) {
    fail_key(section, key, ex.what());
  }
}

double ConfigDoc::get_double_or(const std::string& section, const std::string& key,
                                double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long ConfigDoc::get_int(const std::string& section, const std::string& key) const {
  const double v = get_double(section, key);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) fail_key(section, key, "expected an integer");
  return n;
}

long ConfigDoc::get_int_or(const std::string& section, const std::string& key,
                           long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigDoc::get_bool_or(const std::string& section, const std::string& key,
                            bool fallback) const {
  const auto v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  fail_key(section, key, "expected true/false");
}

std::string ConfigDoc::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
  return find(section, key).value_or(fallback);
}

std::vector<double> ConfigDoc::get_list(const std::string& section,
                                        const std::string& key) const {
  std::vector<double> out;
  for (const auto& cell : split(get(section, key), ',')) {
    const auto body = trim(cell);
    if (body.empty()) continue;
    try {
      out.push_back(parse_double(body));
    } catch (const std::invalid_argument& ex) {
      fail_key(section, key, ex.what());
    }
  }
  if (out.empty()) fail_key(section, key, "empty list");
  return out;
}

void ConfigDoc::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  for (auto& e : entries_) {
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  }
  entries_.push_back({section, key, value});
}

void ConfigDoc::set_dotted(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--set expects section.key=value, got '" + assignment + "'");
  const std::string path(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  const std::size_t dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw std::invalid_argument("--set expects section.key=value, got '" + assignment + "'");
  set(path.substr(0, dot), path.substr(dot + 1), value);
}

std::string ConfigDoc::serialize() const {
  std::string out;
  std::string current;
  bool first = true;
  for (const auto& e : entries_) {
    if (e.section != current || first) {
      if (!first) out += '\n';
      out += '[' + e.section + "]\n";
      current = e.section;
      first = false;
    }
    out += e.key + " = " + e.value + '\n';
  }
  return out;
}

std::uint64_t ConfigDoc::fingerprint() const { return fnv1a(serialize()); }

// ---------------------------------------------------------------------------
// Scenario assembly

namespace {

VisibilityKernel kernel_from_config(const ConfigDoc& doc, const std::string& section) {
  const std::string kind = doc.get_or(section, "kind", "constant");
  if (kind == "constant") {
    return VisibilityKernel::constant(doc.get_double(section, "sigma_success"),
                                      doc.get_double(section, "sigma_failure"));
  }
  if (kind == "security_floor") {
    return VisibilityKernel::security_floor(doc.get_double(section, "kappa"),
                                            doc.get_double(section, "delta"),
                                            doc.get_double(section, "sigma_success"));
  }
  if (kind == "tabulated") {
    const std::vector<double> grid = doc.get_list(section, "grid");
    const std::vector<double> succ = doc.get_list(section, "sigma_success");
    const std::vector<double> fail = doc.get_list(section, "sigma_failure");
    if (grid.size() != succ.size() || grid.size() != fail.size())
      fail_key(section, "grid", "grid and sigma lists must have equal length");
    std::vector<VisibilityKernel::Knot> knots(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) knots[i] = {grid[i], succ[i], fail[i]};
    return VisibilityKernel::tabulated(std::move(knots));
  }
  fail_key(section, "kind", "unknown kernel kind '" + kind + "'");
}

void kernel_to_config(ConfigDoc& doc, const std::string& section,
                      const VisibilityKernel& kernel) {
  switch (kernel.kind()) {
    case VisibilityKernel::Kind::Constant:
      doc.set(section, "kind", "constant");
      doc.set(section, "sigma_success", format_double(kernel.level_success()));
      doc.set(section, "sigma_failure", format_double(kernel.level_failure()));
      return;
    case VisibilityKernel::Kind::SecurityFloor:
      doc.set(section, "kind", "security_floor");
      doc.set(section, "kappa", format_double(kernel.kappa()));
      doc.set(section, "delta", format_double(kernel.delta()));
      doc.set(section, "sigma_success", format_double(kernel.level_success()));
      return;
    case VisibilityKernel::Kind::Tabulated: {
      doc.set(section, "kind", "tabulated");
      std::vector<double> grid, succ, fail;
      for (const auto& k : kernel.knots()) {
        grid.push_back(k.pi);
        succ.push_back(k.sigma_success);
        fail.push_back(k.sigma_failure);
      }
      doc.set(section, "grid", list_to_string(grid));
      doc.set(section, "sigma_success", list_to_string(succ));
      doc.set(section, "sigma_failure", list_to_string(fail));
      return;
    }
  }
}

ValueFunction value_from_config(const ConfigDoc& doc) {
  const std::string kind = doc.get_or("value", "kind", "linear");
  if (kind == "linear")
    return ValueFunction::linear(doc.get_double_or("value", "slope", 1.0),
                                 doc.get_double_or("value", "intercept", 0.0));
  if (kind == "quadratic")
    return ValueFunction::quadratic(doc.get_double_or("value", "c0", 0.0),
                                    doc.get_double("value", "c1"),
                                    doc.get_double("value", "c2"));
  if (kind == "piecewise") {
    const std::vector<double> xs = doc.get_list("value", "x");
    const std::vector<double> ys = doc.get_list("value", "y");
    if (xs.size() != ys.size()) fail_key("value", "x", "x and y lists must match");
    std::vector<std::pair<double, double>> knots(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) knots[i] = {xs[i], ys[i]};
    return ValueFunction::piecewise_linear(std::move(knots));
  }
  fail_key("value", "kind", "unknown value kind '" + kind + "'");
}

void value_to_config(ConfigDoc& doc, const ValueFunction& value) {
  switch (value.kind()) {
    case ValueFunction::Kind::Linear:
      doc.set("value", "kind", "linear");
      doc.set("value", "slope", format_double(value.coeff1()));
      doc.set("value", "intercept", format_double(value.coeff0()));
      return;
    case ValueFunction::Kind::Quadratic:
      doc.set("value", "kind", "quadratic");
      doc.set("value", "c0", format_double(value.coeff0()));
      doc.set("value", "c1", format_double(value.coeff1()));
      doc.set("value", "c2", format_double(value.coeff2()));
      return;
    case ValueFunction::Kind::PiecewiseLinear: {
      doc.set("value", "kind", "piecewise");
      std::vector<double> xs, ys;
      for (const auto& [x, y] : value.knots()) {
        xs.push_back(x);
        ys.push_back(y);
      }
      doc.set("value", "x", list_to_string(xs));
      doc.set("value", "y", list_to_string(ys));
      return;
    }
  }
}

Arm safe_from_config(const ConfigDoc& doc) {
  const std::string kind = doc.get_or("safe", "kind", "uninformative");
  if (kind == "uninformative")
    return Arm(LikelihoodPair(1.0, 1.0), doc.get_double_or("safe", "success_prob", 0.5));
  if (kind == "tech")
    return Arm(OutcomeTech(doc.get_double("safe", "p_high"), doc.get_double("safe", "p_low")));
  if (kind == "raw")
    return Arm(LikelihoodPair(doc.get_double("safe", "lambda"), doc.get_double("safe", "phi")),
               doc.get_double_or("safe", "success_prob", 0.5),
               doc.get_double_or("safe", "success_prob_slope", 0.0));
  fail_key("safe", "kind", "unknown safe-arm kind '" + kind + "'");
}

void safe_to_config(ConfigDoc& doc, const Arm& safe) {
  if (safe.from_tech()) {
    doc.set("safe", "kind", "tech");
    doc.set("safe", "p_high", format_double(safe.tech().p_high));
    doc.set("safe", "p_low", format_double(safe.tech().p_low));
    return;
  }
  const LikelihoodPair lr = safe.ratios();
  if (!lr.informative()) {
    doc.set("safe", "kind", "uninformative");
    doc.set("safe", "success_prob", format_double(safe.raw_mix()));
    return;
  }
  doc.set("safe", "kind", "raw");
  doc.set("safe", "lambda", format_double(lr.lambda));
  doc.set("safe", "phi", format_double(lr.phi));
  doc.set("safe", "success_prob", format_double(safe.raw_mix()));
  doc.set("safe", "success_prob_slope", format_double(safe.mixture_slope()));
}

}  // namespace

Scenario scenario_from_config(const ConfigDoc& doc) {
  Scenario s;
  s.risky = OutcomeTech(doc.get_double("risky", "p_high"), doc.get_double("risky", "p_low"));
  s.safe = safe_from_config(doc);
  s.signal = SignalTech(doc.get_double_or("signal", "q_high", 0.6),
                        doc.get_double_or("signal", "q_low", 0.4));
  s.vis_risky = kernel_from_config(doc, "visibility.risky");
  s.vis_safe = kernel_from_config(doc, "visibility.safe");
  s.value = value_from_config(doc);
  s.validate();
  return s;
}

ConfigDoc scenario_to_config(const Scenario& scenario) {
  ConfigDoc doc;
  doc.set("risky", "p_high", format_double(scenario.risky.p_high));
  doc.set("risky", "p_low", format_double(scenario.risky.p_low));
  safe_to_config(doc, scenario.safe);
  doc.set("signal", "q_high", format_double(scenario.signal.q_high));
  doc.set("signal", "q_low", format_double(scenario.signal.q_low));
  kernel_to_config(doc, "visibility.risky", scenario.vis_risky);
  kernel_to_config(doc, "visibility.safe", scenario.vis_safe);
  value_to_config(doc, scenario.value);
  return doc;
}

ReformShift reform_from_config(const ConfigDoc& doc) {
  return ReformShift::constants(doc.get_double_or("reform", "delta_failure", 0.0),
                                doc.get_double_or("reform", "delta_success", 0.0));
}

SimConfig sim_config_from_config(const ConfigDoc& doc) {
  SimConfig cfg;
  cfg.scenario_pre = scenario_from_config(doc);
  cfg.reform = reform_from_config(doc);
  cfg.n_authors = static_cast<std::size_t>(doc.get_int_or("simulation", "n_authors", 100));
  cfg.n_fields = static_cast<std::size_t>(doc.get_int_or("simulation", "n_fields", 10));
  cfg.periods = static_cast<int>(doc.get_int_or("simulation", "periods", 12));

  if (doc.has("simulation", "adoption_times")) {
    for (double t : doc.get_list("simulation", "adoption_times"))
      cfg.adoption_times.push_back(static_cast<int>(t));
  } else {
    const int base = static_cast<int>(doc.get_int_or("simulation", "adoption_base", 5));
    const int cycle = static_cast<int>(doc.get_int_or("simulation", "adoption_cycle", 5));
    for (std::size_t f = 0; f < cfg.n_fields; ++f)
      cfg.adoption_times.push_back(base + static_cast<int>(f % static_cast<std::size_t>(cycle)));
  }

  cfg.type_prior = doc.get_double_or("simulation", "type_prior", 0.5);
  if (doc.has("simulation", "belief_spread_lo") || doc.has("simulation", "belief_spread_hi"))
    cfg.belief_spread = {doc.get_double("simulation", "belief_spread_lo"),
                         doc.get_double("simulation", "belief_spread_hi")};
  cfg.projects_per_period =
      static_cast<int>(doc.get_int_or("simulation", "projects_per_period", 1));
  cfg.misclassification_rate =
      doc.get_double_or("simulation", "misclassification_rate", 0.0);
  cfg.burn_in = static_cast<int>(doc.get_int_or("simulation", "burn_in", 0));
  cfg.seed = static_cast<std::uint64_t>(doc.get_int_or("simulation", "seed", 1));
  cfg.validate();
  return cfg;
}

RegressionSpec estimation_spec_from_config(const ConfigDoc& doc) {
  RegressionSpec spec;
  spec.outcome = doc.get_or("estimation", "outcome", "risky");
  const std::string form = doc.get_or("estimation", "form", "event");
  if (form == "event")
    spec.form = InteractionForm::EventStudyByRep;
  else if (form == "pooled")
    spec.form = InteractionForm::PooledPostByRep;
  else
    fail_key("estimation", "form", "expected event or pooled");
  spec.rep_column = doc.get_or("estimation", "rep", "rep_pre");
  spec.cluster = doc.get_or("estimation", "cluster", "field_id");
  if (doc.has("estimation", "fixed_effects")) {
    spec.fixed_effects.clear();
    for (const auto& fe : split(doc.get("estimation", "fixed_effects"), ','))
      spec.fixed_effects.emplace_back(trim(fe));
  }
  spec.omitted_event_time = static_cast<int>(doc.get_int_or("estimation", "omitted", -1));
  spec.window_lo = static_cast<int>(doc.get_int_or("estimation", "window_lo", -5));
  spec.window_hi = static_cast<int>(doc.get_int_or("estimation", "window_hi", 5));
  spec.validate();
  return spec;
}

bool estimation_visible_only(const ConfigDoc& doc) {
  return doc.get_bool_or("estimation", "visible_only", true);
}

std::size_t estimation_min_cell(const ConfigDoc& doc) {
  return static_cast<std::size_t>(doc.get_int_or("estimation", "min_cell", 3));
}

}  // namespace repvis
