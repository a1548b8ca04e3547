#include "repvis/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "repvis/rng.hpp"
#include "repvis/util.hpp"

namespace repvis {

namespace {

constexpr double kBeliefFloor = 1e-9;

double clamp_belief(double pi) {
  return std::min(1.0 - kBeliefFloor, std::max(kBeliefFloor, pi));
}

struct AuthorTrack {
  std::vector<PanelRow> rows;
  double rep_pre = 0.0;
};

AuthorTrack simulate_author(std::uint32_t author, const SimConfig& cfg,
                            const Scenario& pre, const Scenario& post) {
  const std::uint32_t field = author % cfg.n_fields;
  const int t_adopt = cfg.adoption_times[field];

  double pi0 = cfg.type_prior;
  if (cfg.belief_spread) {
    CounterRng init = CounterRng::keyed(cfg.seed, {rng_site::kInitialBelief, author});
    pi0 = init.uniform(cfg.belief_spread->first, cfg.belief_spread->second);
  }
  pi0 = clamp_belief(pi0);
  CounterRng type_rng = CounterRng::keyed(cfg.seed, {rng_site::kType, author});
  const bool is_high = type_rng.bernoulli(pi0);

  const LikelihoodPair risky_lr = pre.risky.ratios();
  const LikelihoodPair safe_lr = pre.safe.ratios();
  const double q = is_high ? pre.signal.q_high : pre.signal.q_low;
  const double p_risky = is_high ? pre.risky.p_high : pre.risky.p_low;
  // Raw safe arms carry no type-conditional outcome model; their realized
  // success frequency is the supplied mixture at the current belief.
  const bool safe_has_tech = pre.safe.from_tech();
  const double p_safe_typed =
      safe_has_tech ? (is_high ? pre.safe.tech().p_high : pre.safe.tech().p_low) : 0.0;

  AuthorTrack track;
  track.rows.reserve(static_cast<std::size_t>(cfg.periods) * cfg.projects_per_period);
  double pi = pi0;
  track.rep_pre = pi0;

  for (int t = 1 - cfg.burn_in; t <= cfg.periods; ++t) {
    if (t == t_adopt) track.rep_pre = pi;  // frozen pre-adoption belief
    const bool is_post = t >= t_adopt;
    const Scenario& scen = is_post ? post : pre;
    const double pi_open = pi;
    const Policy policy = cutoff_policy(pi_open, scen);

    for (int j = 0; j < cfg.projects_per_period; ++j) {
      const std::uint64_t tkey = static_cast<std::uint64_t>(t + cfg.burn_in);
      const std::uint64_t jkey = static_cast<std::uint64_t>(j);
      const bool good = CounterRng::keyed(cfg.seed, {rng_site::kSignal, author, tkey, jkey})
                            .bernoulli(q);
      const bool risky = policy == Policy::AlwaysRisky ||
                         (policy == Policy::RiskyIffGood && good);
      const double p_success =
          risky ? p_risky : (safe_has_tech ? p_safe_typed : scen.safe.mixture(pi_open));
      const bool success =
          CounterRng::keyed(cfg.seed, {rng_site::kOutcome, author, tkey, jkey})
              .bernoulli(p_success);
      const KernelPoint k =
          risky ? scen.vis_risky.at(pi_open) : scen.vis_safe.at(pi_open);
      const double sigma = success ? k.sigma_success : k.sigma_failure;
      const bool survived =
          CounterRng::keyed(cfg.seed, {rng_site::kSurvival, author, tkey, jkey})
              .bernoulli(sigma);

      if (t >= 1) {
        PanelRow row;
        row.author_id = author;
        row.field_id = field;
        row.period = t;
        row.event_time = t - t_adopt;
        row.post = is_post;
        row.risky = risky;
        row.action_true_risky = risky;
        row.success = success;
        row.survived = survived;
        track.rows.push_back(row);
      }

      if (survived) {
        const LikelihoodPair& lr = risky ? risky_lr : safe_lr;
        pi = clamp_belief(success ? update_success(pi, lr) : update_failure(pi, lr));
      }
    }
  }

  for (PanelRow& row : track.rows) row.rep_pre = track.rep_pre;
  return track;
}

}  // namespace

void SimConfig::validate() const {
  if (n_authors == 0 || n_fields == 0) throw std::invalid_argument("empty panel");
  if (periods < 1) throw std::invalid_argument("periods must be >= 1");
  if (adoption_times.size() != n_fields)
    throw std::invalid_argument("need one adoption time per field");
  for (int t : adoption_times)
    if (t < 1 || t > periods)
      throw std::invalid_argument("adoption times must lie in [1, periods]");
  if (!(type_prior > 0.0 && type_prior < 1.0))
    throw std::invalid_argument("type prior must be interior");
  if (belief_spread) {
    const auto [lo, hi] = *belief_spread;
    if (!(lo > 0.0 && hi < 1.0 && lo < hi))
      throw std::invalid_argument("belief spread must satisfy 0 < lo < hi < 1");
  }
  if (projects_per_period < 1) throw std::invalid_argument("projects_per_period >= 1");
  if (!(misclassification_rate >= 0.0 && misclassification_rate < 0.5))
    throw std::invalid_argument("misclassification rate must lie in [0, 0.5)");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
  scenario_pre.validate();
}

std::vector<PanelRow> simulate(const SimConfig& config, unsigned threads) {
  config.validate();
  const Scenario& pre = config.scenario_pre;
  Scenario post = pre;
  post.vis_risky = apply_reform(pre.vis_risky, config.reform);

  std::vector<AuthorTrack> tracks(config.n_authors);
  parallel_for(config.n_authors, threads, [&](std::size_t a) {
    tracks[a] = simulate_author(static_cast<std::uint32_t>(a), config, pre, post);
  });

  // Median split of the frozen reputation within each field.
  std::vector<std::vector<double>> field_reps(config.n_fields);
  for (std::size_t a = 0; a < tracks.size(); ++a)
    field_reps[a % config.n_fields].push_back(tracks[a].rep_pre);
  std::vector<double> medians(config.n_fields, 0.0);
  for (std::size_t f = 0; f < config.n_fields; ++f) {
    auto& v = field_reps[f];
    if (v.empty()) continue;
    const std::size_t mid = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    medians[f] = v[mid];
  }

  std::vector<PanelRow> rows;
  std::size_t total = 0;
  for (const auto& t : tracks) total += t.rows.size();
  rows.reserve(total);
  for (std::size_t a = 0; a < tracks.size(); ++a) {
    const bool high = tracks[a].rep_pre >= medians[a % config.n_fields];
    for (PanelRow row : tracks[a].rows) {
      row.high_rep = high;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<AggregateCell> aggregate(const std::vector<PanelRow>& rows,
                                     CellLevel level, std::size_t min_cell_count) {
  if (rows.empty()) throw std::invalid_argument("cannot aggregate an empty panel");

  struct Accum {
    std::size_t n = 0, risky = 0, risky_succ = 0, risky_fail = 0,
                risky_fail_survived = 0, post = 0;
  };
  std::map<std::tuple<std::uint32_t, std::uint32_t, int>, Accum> cells;
  for (const PanelRow& r : rows) {
    const std::uint32_t author = level == CellLevel::AuthorFieldPeriod ? r.author_id : 0;
    Accum& a = cells[{author, r.field_id, r.period}];
    ++a.n;
    if (r.post) ++a.post;
    if (r.risky) {
      ++a.risky;
      if (r.success) {
        ++a.risky_succ;
      } else {
        ++a.risky_fail;
        if (r.survived) ++a.risky_fail_survived;
      }
    }
  }

  std::vector<AggregateCell> out;
  out.reserve(cells.size());
  for (const auto& [key, a] : cells) {
    if (a.n < min_cell_count) continue;
    AggregateCell c;
    c.author_id = std::get<0>(key);
    c.field_id = std::get<1>(key);
    c.period = std::get<2>(key);
    c.cell_count = a.n;
    c.risky_share = static_cast<double>(a.risky) / static_cast<double>(a.n);
    c.rr_intensity = static_cast<double>(a.post) / static_cast<double>(a.n);
    if (a.risky > 0)
      c.succ_risky = static_cast<double>(a.risky_succ) / static_cast<double>(a.risky);
    if (a.risky_fail > 0)
      c.null_survive =
          static_cast<double>(a.risky_fail_survived) / static_cast<double>(a.risky_fail);
    out.push_back(c);
  }
  return out;
}

std::vector<PanelRow> inject_misclassification(std::vector<PanelRow> rows, double eta,
                                               std::uint64_t seed) {
  if (!(eta >= 0.0 && eta < 0.5))
    throw std::domain_error("misclassification rate must lie in [0, 0.5)");
  if (eta == 0.0) return rows;
  std::map<std::pair<std::uint32_t, int>, std::uint64_t> project_counter;
  for (PanelRow& r : rows) {
    const std::uint64_t j = project_counter[{r.author_id, r.period}]++;
    const bool flip =
        CounterRng::keyed(seed, {rng_site::kLabelFlip, r.author_id,
                                 static_cast<std::uint64_t>(r.period), j})
            .bernoulli(eta);
    if (flip) r.risky = !r.risky;
  }
  return rows;
}

Dataset to_dataset(const std::vector<PanelRow>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> author(n), field(n), period(n), event(n), post(n), rep(n),
      high(n), risky(n), success(n), survived(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PanelRow& r = rows[i];
    author[i] = r.author_id;
    field[i] = r.field_id;
    period[i] = r.period;
    event[i] = r.event_time;
    post[i] = r.post ? 1.0 : 0.0;
    rep[i] = r.rep_pre;
    high[i] = r.high_rep ? 1.0 : 0.0;
    risky[i] = r.risky ? 1.0 : 0.0;
    success[i] = r.success ? 1.0 : 0.0;
    survived[i] = r.survived ? 1.0 : 0.0;
  }
  Dataset d;
  d.add_column("author_id", std::move(author));
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("event_time", std::move(event));
  d.add_column("post", std::move(post));
  d.add_column("rep_pre", std::move(rep));
  d.add_column("high_rep", std::move(high));
  d.add_column("risky", std::move(risky));
  d.add_column("success", std::move(success));
  d.add_column("survived", std::move(survived));
  return d;
}

}  // namespace repvis
