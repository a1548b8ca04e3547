#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "repvis/dataset.hpp"
#include "repvis/model.hpp"

namespace repvis {

/// Monte Carlo career-panel configuration.  Authors live in one field each
/// (round robin); the field adopts the reform at `adoption_times[field]`
/// (1-based period) and all later periods use the shifted risky kernel.
/// `burn_in` extra periods run before period 1 without emitting rows so the
/// belief distribution settles; `belief_spread` draws each author's initial
/// belief uniformly from a range (the type is drawn with that probability,
/// so the market starts correct), otherwise every author starts at
/// `type_prior`.
struct SimConfig {
  std::size_t n_authors = 100;
  std::size_t n_fields = 10;
  int periods = 12;
  std::vector<int> adoption_times;
  Scenario scenario_pre;
  ReformShift reform = ReformShift::constants(0.0, 0.0);
  double type_prior = 0.5;
  std::optional<std::pair<double, double>> belief_spread;
  int projects_per_period = 1;
  double misclassification_rate = 0.0;
  int burn_in = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One project outcome.  `risky` is the recorded classification (label noise
/// flips it); `action_true` never changes.  `rep_pre` is the public belief
/// entering the field's adoption period, constant across an author's rows.
struct PanelRow {
  std::uint32_t author_id = 0;
  std::uint32_t field_id = 0;
  int period = 0;
  int event_time = 0;
  bool post = false;
  double rep_pre = 0.0;
  bool high_rep = false;
  bool risky = false;
  bool success = false;
  bool survived = false;
  bool action_true_risky = false;
};

/// Aggregation keys.
enum class CellLevel { AuthorFieldPeriod, FieldPeriod };

struct AggregateCell {
  std::uint32_t author_id = 0;  // unused at FieldPeriod level
  std::uint32_t field_id = 0;
  int period = 0;
  double risky_share = 0.0;
  std::optional<double> succ_risky;    // missing without risky projects
  std::optional<double> null_survive;  // missing without risky failures
  double rr_intensity = 0.0;           // post-share of the cell
  std::size_t cell_count = 0;
};

/// Simulates the panel.  Within a period every project is decided at the
/// period's opening belief; surviving outcomes update the belief
/// sequentially in project order and take effect from the next decision on.
/// Authors are independent streams of the counter RNG, so output is
/// bit-identical for a given config regardless of `threads`.
std::vector<PanelRow> simulate(const SimConfig& config, unsigned threads = 1);

/// Cells below `min_cell_count` projects are dropped.
std::vector<AggregateCell> aggregate(const std::vector<PanelRow>& rows,
                                     CellLevel level, std::size_t min_cell_count = 3);

/// Independently flips each risky label with probability eta; deterministic
/// in (seed, author, period, project).
std::vector<PanelRow> inject_misclassification(std::vector<PanelRow> rows, double eta,
                                               std::uint64_t seed);

/// Panel with columns exactly (author_id, field_id, period, event_time,
/// post, rep_pre, high_rep, risky, success, survived).
Dataset to_dataset(const std::vector<PanelRow>& rows);

}  // namespace repvis
