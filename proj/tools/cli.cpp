#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "repvis/econometrics.hpp"
#include "repvis/propositions.hpp"
#include "repvis/scenario_io.hpp"
#include "repvis/sign_test.hpp"
#include "repvis/simulate.hpp"
#include "repvis/util.hpp"

namespace repvis::cli {

namespace {

namespace fs = std::filesystem;

unsigned effective_threads(const CommonOptions& common) {
  return common.threads == 0 ? default_threads() : common.threads;
}

ConfigDoc load_config(const std::string& path, const CommonOptions& common) {
  ConfigDoc doc = ConfigDoc::load_file(path);
  for (const auto& assignment : common.overrides) doc.set_dotted(assignment);
  return doc;
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Every artifact-writing command records what it produced.  Timestamps live
/// only here; the artifacts themselves are byte-stable across reruns.
void write_manifest(const std::string& manifest_path, const std::string& command,
                    std::uint64_t config_fingerprint, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_fingerprint"] = hex64(config_fingerprint);
  j["seed"] = seed;
  j["tool_version"] = kToolVersion;
  j["created_at"] = iso_timestamp();
  j["outputs"] = outputs;
  std::ofstream os(manifest_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest: " + manifest_path);
  os << j.dump(2) << '\n';
}

nlohmann::json report_to_json(const SignTestReport& r) {
  return {{"pi", r.pi},
          {"psi", r.psi},
          {"phi", r.phi},
          {"gamma", r.gamma},
          {"delta_prime_exact", r.delta_prime_exact},
          {"delta_prime_core", r.delta_prime_core},
          {"residual", r.residual},
          {"cutoff_slope_sign", r.cutoff_slope_sign},
          {"sign_exact", r.sign_exact},
          {"sign_core", r.sign_core},
          {"signs_disagree", r.signs_disagree},
          {"conservatism_holds", r.conservatism_holds}};
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  if (parts.size() != 3) throw std::invalid_argument("grid spec must be start:stop:step");
  const double start = parse_double(trim(parts[0]));
  const double stop = parse_double(trim(parts[1]));
  const double step = parse_double(trim(parts[2]));
  if (!(step > 0.0) || stop < start || start <= 0.0 || stop >= 1.0)
    throw std::invalid_argument("grid must satisfy 0 < start <= stop < 1 with step > 0");
  std::vector<double> grid;
  for (double x = start; x <= stop + 1e-12; x += step) grid.push_back(std::min(x, stop));
  if (grid.empty()) throw std::invalid_argument("grid spec produced no points");
  return grid;
}

int map_exception(std::ostream& err, const char* command) {
  try {
    throw;
  } catch (const std::invalid_argument& ex) {
    err << command << ": " << ex.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& ex) {
    err << command << ": " << ex.what() << '\n';
    return kInputError;
  } catch (const std::exception& ex) {
    err << command << ": " << ex.what() << '\n';
    return kNumericalFailure;
  }
}

Dataset field_time_dataset(const std::vector<AggregateCell>& cells) {
  const std::size_t n = cells.size();
  std::vector<double> field(n), period(n), risky_share(n), succ(n), nullsurv(n),
      intensity(n), count(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AggregateCell& c = cells[i];
    field[i] = c.field_id;
    period[i] = c.period;
    risky_share[i] = c.risky_share;
    succ[i] = c.succ_risky.value_or(std::numeric_limits<double>::quiet_NaN());
    nullsurv[i] = c.null_survive.value_or(std::numeric_limits<double>::quiet_NaN());
    intensity[i] = c.rr_intensity;
    count[i] = static_cast<double>(c.cell_count);
  }
  Dataset d;
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("risky_share", std::move(risky_share));
  d.add_column("succ_risky", std::move(succ));
  d.add_column("null_survive", std::move(nullsurv));
  d.add_column("rr_intensity", std::move(intensity));
  d.add_column("cell_count", std::move(count));
  return d;
}

/// Joins the field-period instrument columns onto panel rows.
void join_field_period(Dataset* panel, const std::vector<AggregateCell>& cells) {
  std::map<std::pair<long, long>, std::pair<double, double>> lut;
  for (const AggregateCell& c : cells)
    lut[{static_cast<long>(c.field_id), c.period}] = {
        c.null_survive.value_or(std::numeric_limits<double>::quiet_NaN()),
        c.rr_intensity};
  const auto& field = panel->column("field_id");
  const auto& period = panel->column("period");
  const std::size_t n = panel->n_rows();
  std::vector<double> nullsurv(n), intensity(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = lut.find({static_cast<long>(std::llround(field[i])),
                              static_cast<long>(std::llround(period[i]))});
    if (it == lut.end()) {
      nullsurv[i] = std::numeric_limits<double>::quiet_NaN();
      intensity[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      nullsurv[i] = it->second.first;
      intensity[i] = it->second.second;
    }
  }
  panel->add_column("null_survive", std::move(nullsurv));
  panel->add_column("rr_intensity", std::move(intensity));
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write: " + path);
  os << body;
}

}  // namespace

std::string resolve_output_path(const std::string& path, const CommonOptions& common) {
  std::string base = common.out_dir;
  if (base.empty()) {
    if (const char* env = std::getenv("REPVIS_OUT_DIR")) base = env;
  }
  if (base.empty() || fs::path(path).is_absolute()) return path;
  fs::create_directories(base);
  return (fs::path(base) / path).string();
}

int cmd_calc(const std::string& config_path, double pi, const CommonOptions& common,
             std::ostream& out, std::ostream& err) {
  try {
    const ConfigDoc doc = load_config(config_path, common);
    const Scenario scenario = scenario_from_config(doc);
    require_interior(pi);
    const SignTestReport report = cutoff_slope_sign(pi, scenario);
    out << report_to_json(report).dump(2) << '\n';
    return kOk;
  } catch (...) {
    return map_exception(err, "calc");
  }
}

int cmd_sweep(const std::string& config_path, const std::string& grid_spec,
              const std::string& out_path, const CommonOptions& common,
              std::ostream& out, std::ostream& err) {
  try {
    const ConfigDoc doc = load_config(config_path, common);
    const Scenario scenario = scenario_from_config(doc);
    const std::vector<double> grid = parse_grid_spec(grid_spec);
    const std::vector<SweepRow> rows =
        sweep(scenario, grid, NumericSettings::defaults(), effective_threads(common));
    const std::string path = resolve_output_path(out_path, common);
    std::ostringstream body;
    write_sweep_csv(body, rows);
    write_text_file(path, body.str());
    write_manifest(path + ".manifest.json", "sweep", doc.fingerprint(), 0, {path});
    out << "wrote " << rows.size() << " rows to " << path << '\n';
    return kOk;
  } catch (...) {
    return map_exception(err, "sweep");
  }
}

int cmd_verify(const std::string& selector, std::uint64_t seed, const CommonOptions& common,
               std::ostream& out, std::ostream& err) {
  try {
    const std::vector<VerificationReport> reports = run_claims(selector, seed);
    bool all_passed = true;
    for (const VerificationReport& r : reports) {
      out << (r.passed ? "PASS" : "FAIL") << "  " << r.claim_id
          << "  max_violation=" << format_double(r.max_abs_violation)
          << " (tol=" << format_double(r.tolerance) << ", probes=" << r.n_probes << ")\n";
      if (!r.passed) {
        all_passed = false;
        out << "      worst probe " << format_double(r.worst.probe) << ": lhs="
            << format_double(r.worst.lhs) << " rhs=" << format_double(r.worst.rhs)
            << " [" << r.worst.note << "]\n";
      }
      if (!common.out_dir.empty() || std::getenv("REPVIS_OUT_DIR") != nullptr) {
        const std::string path =
            resolve_output_path("verify_" + r.claim_id + ".json", common);
        write_text_file(path, to_json(r) + "\n");
      }
    }
    return all_passed ? kOk : kVerificationFailure;
  } catch (...) {
    return map_exception(err, "verify");
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const CommonOptions& common, std::ostream& out, std::ostream& err) {
  try {
    const ConfigDoc doc = load_config(config_path, common);
    const SimConfig cfg = sim_config_from_config(doc);
    std::vector<PanelRow> rows = simulate(cfg, effective_threads(common));
    if (cfg.misclassification_rate > 0.0)
      rows = inject_misclassification(std::move(rows), cfg.misclassification_rate, cfg.seed);
    const Dataset panel = to_dataset(rows);
    const std::string path = resolve_output_path(out_path, common);
    panel.write_csv_file(path);
    write_manifest(path + ".manifest.json", "simulate", doc.fingerprint(), cfg.seed, {path});
    out << "wrote " << panel.n_rows() << " rows to " << path << '\n';
    return kOk;
  } catch (...) {
    return map_exception(err, "simulate");
  }
}

int cmd_estimate(const std::string& panel_path, const std::string& config_path,
                 const std::string& out_dir, const CommonOptions& common,
                 std::ostream& out, std::ostream& err) {
  try {
    ConfigDoc doc;
    if (!config_path.empty()) doc = load_config(config_path, common);
    for (const auto& assignment : common.overrides) doc.set_dotted(assignment);

    const Dataset panel = Dataset::read_csv_file(panel_path);
    for (const char* col : {"author_id", "field_id", "period", "event_time", "post",
                            "rep_pre", "high_rep", "risky", "success", "survived"})
      (void)panel.column(col);

    RegressionSpec spec = estimation_spec_from_config(doc);
    const bool visible_only = estimation_visible_only(doc);
    const std::size_t min_cell = estimation_min_cell(doc);

    // Registry-style aggregates come from the full panel; the regression
    // samples mirror the public record when visible_only is set.
    std::vector<PanelRow> row_view(panel.n_rows());
    {
      const auto& author = panel.column("author_id");
      const auto& field = panel.column("field_id");
      const auto& period = panel.column("period");
      const auto& post = panel.column("post");
      const auto& risky = panel.column("risky");
      const auto& success = panel.column("success");
      const auto& survived = panel.column("survived");
      for (std::size_t i = 0; i < panel.n_rows(); ++i) {
        row_view[i].author_id = static_cast<std::uint32_t>(author[i]);
        row_view[i].field_id = static_cast<std::uint32_t>(field[i]);
        row_view[i].period = static_cast<int>(period[i]);
        row_view[i].post = post[i] != 0.0;
        row_view[i].risky = risky[i] != 0.0;
        row_view[i].success = success[i] != 0.0;
        row_view[i].survived = survived[i] != 0.0;
      }
    }
    const std::vector<AggregateCell> cells =
        aggregate(row_view, CellLevel::FieldPeriod, min_cell);

    const auto& survived_col = panel.column("survived");
    Dataset visible =
        visible_only
            ? panel.filter([&](std::size_t r) { return survived_col[r] != 0.0; })
            : panel;
    join_field_period(&visible, cells);
    const auto& risky_col = visible.column("risky");
    const Dataset risky_rows =
        visible.filter([&](std::size_t r) { return risky_col[r] != 0.0; });

    const fs::path dir = resolve_output_path(out_dir, common);
    fs::create_directories(dir);
    std::vector<std::string> outputs;
    auto emit = [&](const std::string& name, const std::string& body) {
      const std::string path = (dir / name).string();
      write_text_file(path, body);
      outputs.push_back(path);
    };

    RegressionSpec risky_spec = spec;
    risky_spec.outcome = "risky";
    const EventStudyResult ev_risky = fit_event_study(visible, risky_spec);

    RegressionSpec success_spec = spec;
    success_spec.outcome = "success";
    const EventStudyResult ev_success = fit_event_study(risky_rows, success_spec);

    const IVResult first = fit_first_stage(field_time_dataset(cells), "field_id");
    const IVResult iv_risky = fit_2sls(visible, risky_spec);
    const IVResult iv_success = fit_2sls(risky_rows, success_spec);

    RegressionSpec pooled_spec = risky_spec;
    pooled_spec.form = InteractionForm::PooledPostByRep;
    const EventStudyResult pooled = fit_event_study(visible, pooled_spec);

    auto csv_of = [](const CoefficientTable& t) {
      std::ostringstream os;
      write_coefficient_csv(os, t);
      return os.str();
    };
    auto series_of = [](const EventStudyResult& r) {
      std::ostringstream os;
      write_event_series_csv(os, r);
      return os.str();
    };

    emit("event_risky.csv", csv_of(coefficient_table(ev_risky)));
    emit("event_risky.json", coefficient_json(coefficient_table(ev_risky)) + "\n");
    emit("event_success.csv", csv_of(coefficient_table(ev_success)));
    emit("event_success.json", coefficient_json(coefficient_table(ev_success)) + "\n");
    emit("series_risky.csv", series_of(ev_risky));
    emit("series_success.csv", series_of(ev_success));
    emit("first_stage.csv", csv_of(coefficient_table(first)));
    emit("iv_risky.csv", csv_of(coefficient_table(iv_risky)));
    emit("iv_success.csv", csv_of(coefficient_table(iv_success)));
    emit("pooled_risky.csv", csv_of(coefficient_table(pooled)));

    write_manifest((dir / "manifest.json").string(), "estimate", doc.fingerprint(), 0,
                   outputs);

    out << "event risky: post_avg[0..2]=" << format_double(ev_risky.post_avg_early)
        << " pretrend_p=" << format_double(ev_risky.pretrend_p) << '\n';
    out << "event success|risky: post_avg[0..2]=" << format_double(ev_success.post_avg_early)
        << " pretrend_p=" << format_double(ev_success.pretrend_p) << '\n';
    out << "first stage: coef=" << format_double(first.first_stage_coef)
        << " F=" << format_double(first.first_stage_F) << '\n';
    const Coefficient& lam = iv_risky.second_stage.at("null_survive_x_rep");
    const Coefficient& rho = iv_success.second_stage.at("null_survive_x_rep");
    out << "2sls: risky=" << format_double(lam.estimate)
        << " success=" << format_double(rho.estimate)
        << (iv_risky.weak_instrument_warning ? "  [weak instrument]" : "") << '\n';
    return kOk;
  } catch (...) {
    return map_exception(err, "estimate");
  }
}

int cmd_report(const std::string& config_path, const std::string& out_dir,
               std::uint64_t seed, const CommonOptions& common, std::ostream& out,
               std::ostream& err) {
  try {
    const ConfigDoc doc = load_config(config_path, common);
    const Scenario scenario = scenario_from_config(doc);
    const fs::path dir = resolve_output_path(out_dir, common);
    fs::create_directories(dir);
    std::vector<std::string> outputs;

    const std::vector<SweepRow> rows = sweep(scenario, default_grid(),
                                             NumericSettings::defaults(),
                                             effective_threads(common));
    {
      std::ostringstream body;
      write_sweep_csv(body, rows);
      const std::string path = (dir / "sweep.csv").string();
      write_text_file(path, body.str());
      outputs.push_back(path);
    }

    bool all_passed = true;
    for (const VerificationReport& r : run_claims("all", seed)) {
      const std::string path = (dir / ("verify_" + r.claim_id + ".json")).string();
      write_text_file(path, to_json(r) + "\n");
      outputs.push_back(path);
      if (!r.passed) all_passed = false;
      out << (r.passed ? "PASS" : "FAIL") << "  " << r.claim_id << '\n';
    }

    write_manifest((dir / "manifest.json").string(), "report", doc.fingerprint(), seed,
                   outputs);
    out << "report bundle in " << dir.string() << '\n';
    return all_passed ? kOk : kVerificationFailure;
  } catch (...) {
    return map_exception(err, "report");
  }
}

}  // namespace repvis::cli
