#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repvis/dataset.hpp"

namespace repvis {

/// Convergence metadata of the iterated demeaning.
struct WithinMeta {
  std::size_t iterations = 0;
  double achieved = 0.0;  // max |group mean| after the last sweep
  bool converged = false;
};

struct WithinResult {
  Dataset data;  // value columns replaced by their within-transformed versions
  WithinMeta meta;
};

/// Iterated demeaning of `value_columns` over the `fixed_effects` groupings
/// until every group mean is below `tol` in magnitude (or max_iterations).
/// Grouping columns must hold exact integer codes with at least two groups.
WithinResult within_transform(const Dataset& data,
                              const std::vector<std::string>& fixed_effects,
                              const std::vector<std::string>& value_columns,
                              double tol = 1e-10, std::size_t max_iterations = 1000);

struct Coefficient {
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

enum class InteractionForm {
  EventStudyByRep,   ///< event-time dummies (omitted category excluded) x reputation
  PooledPostByRep,   ///< single post x reputation interaction
};

struct RegressionSpec {
  std::string outcome = "risky";
  InteractionForm form = InteractionForm::EventStudyByRep;
  std::string rep_column = "rep_pre";
  std::vector<std::string> fixed_effects = {"author_id", "field_id", "period"};
  std::string cluster = "field_id";
  int omitted_event_time = -1;
  int window_lo = -5;
  int window_hi = +5;

  void validate() const;
};

struct EventStudyResult {
  /// Event-time coefficient map (EventStudyByRep form).
  std::map<int, Coefficient> coefficients;
  /// Pooled interaction (PooledPostByRep form).
  Coefficient pooled;
  double pretrend_stat = 0.0;  ///< Wald statistic, all leads jointly zero
  double pretrend_p = 1.0;
  std::size_t pretrend_df = 0;
  double post_avg_early = 0.0;  ///< mean estimate over k in [0, 2]
  double post_avg_late = 0.0;   ///< mean estimate over k in [3, 5]
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  bool few_clusters_warning = false;
  std::vector<std::string> dropped_columns;  ///< rank-deficient columns, by name
  WithinMeta within;
};

/// OLS on within-transformed interactions with cluster-robust (sandwich)
/// covariance at `spec.cluster`, small-sample scaled by
/// (G/(G-1)) ((N-1)/(N-k)) with absorbed fixed effects counted in k.
/// Event times outside the window are binned into its endpoints.  Inference
/// uses t with G-1 degrees of freedom; the pretrend Wald statistic tests all
/// leads (k < omitted) jointly against a chi-square.
EventStudyResult fit_event_study(const Dataset& data, const RegressionSpec& spec);

struct IVResult {
  double first_stage_coef = 0.0;
  double first_stage_se = 0.0;
  double first_stage_F = 0.0;
  std::map<std::string, Coefficient> second_stage;
  bool weak_instrument_warning = false;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
};

/// Field-by-period first stage: null_survive on rr_intensity with field and
/// period fixed effects; rows with missing null_survive are dropped.
IVResult fit_first_stage(const Dataset& field_time_data,
                         const std::string& cluster = "field_id");

/// Just-identified 2SLS at the row level: instruments null_survive x rep with
/// rr_intensity x rep, absorbing spec.fixed_effects.  Second-stage standard
/// errors use the IV residuals y - x b (never first-stage fitted residuals);
/// rows whose field-period lacks a null_survive value are dropped.
IVResult fit_2sls(const Dataset& data, const RegressionSpec& spec);

/// Coefficient table in the (term, estimate, se, t, p, n_obs, n_clusters)
/// layout shared by the CSV and JSON writers.
struct CoefficientTable {
  struct Row {
    std::string term;
    Coefficient coef;
  };
  std::vector<Row> rows;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
};

CoefficientTable coefficient_table(const EventStudyResult& result);
CoefficientTable coefficient_table(const IVResult& result);

void write_coefficient_csv(std::ostream& os, const CoefficientTable& table);
std::string coefficient_json(const CoefficientTable& table);

/// Plot-ready long format (event_time, coef, se).
void write_event_series_csv(std::ostream& os, const EventStudyResult& result);

}  // namespace repvis
