#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "repvis/econometrics.hpp"
#include "repvis/rng.hpp"

using namespace repvis;

namespace {

struct PanelSpec {
  std::size_t n_authors = 60;
  std::size_t n_fields = 6;
  int periods = 10;
  int adoption_base = 5;
  std::uint64_t seed = 1;
  double interaction = 0.0;  // coefficient on post x rep
  double noise_sd = 0.05;
};

/// Synthetic outcome panel with known fixed effects and interaction.
Dataset make_panel(const PanelSpec& ps) {
  CounterRng rng = CounterRng::keyed(ps.seed, {77});
  std::vector<double> alpha_author(ps.n_authors), rep(ps.n_authors);
  for (std::size_t a = 0; a < ps.n_authors; ++a) {
    alpha_author[a] = rng.uniform(-1.0, 1.0);
    rep[a] = rng.uniform(0.0, 1.0);
  }
  std::vector<double> alpha_field(ps.n_fields);
  for (auto& v : alpha_field) v = rng.uniform(-0.5, 0.5);
  std::vector<double> alpha_period(static_cast<std::size_t>(ps.periods));
  for (auto& v : alpha_period) v = rng.uniform(-0.5, 0.5);

  std::vector<double> author, field, period, event, post, rep_col, y;
  for (std::size_t a = 0; a < ps.n_authors; ++a) {
    const std::size_t f = a % ps.n_fields;
    const int t_adopt = ps.adoption_base + static_cast<int>(f % 3);
    for (int t = 1; t <= ps.periods; ++t) {
      const bool is_post = t >= t_adopt;
      const double eps = rng.uniform(-1.0, 1.0) * ps.noise_sd * 1.7320508075688772;
      author.push_back(static_cast<double>(a));
      field.push_back(static_cast<double>(f));
      period.push_back(t);
      event.push_back(t - t_adopt);
      post.push_back(is_post ? 1.0 : 0.0);
      rep_col.push_back(rep[a]);
      y.push_back(alpha_author[a] + alpha_field[f] +
                  alpha_period[static_cast<std::size_t>(t - 1)] +
                  ps.interaction * (is_post ? rep[a] : 0.0) + eps);
    }
  }
  Dataset d;
  d.add_column("author_id", std::move(author));
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("event_time", std::move(event));
  d.add_column("post", std::move(post));
  d.add_column("rep_pre", std::move(rep_col));
  d.add_column("y", std::move(y));
  return d;
}

/// Brute-force dummy-variable OLS for the pooled interaction, as an oracle
/// for the within-transform route.
double dummy_ols_interaction(const Dataset& d) {
  const std::size_t n = d.n_rows();
  const auto& author = d.column("author_id");
  const auto& field = d.column("field_id");
  const auto& period = d.column("period");
  const auto& post = d.column("post");
  const auto& rep = d.column("rep_pre");
  const auto& y = d.column("y");

  auto codes = [](const std::vector<double>& v) {
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return sorted;
  };
  const std::vector<double> authors = codes(author);
  const std::vector<double> periods = codes(period);
  (void)field;  // nested inside authors, so field dummies would be redundant

  // Intercept + interaction + (levels - 1) dummies per grouping.
  const std::size_t k = 2 + (authors.size() - 1) + (periods.size() - 1);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    X(i, c++) = 1.0;
    X(i, c++) = post[i] * rep[i];
    for (std::size_t a = 1; a < authors.size(); ++a)
      X(i, c++) = author[i] == authors[a] ? 1.0 : 0.0;
    for (std::size_t t = 1; t < periods.size(); ++t)
      X(i, c++) = period[i] == periods[t] ? 1.0 : 0.0;
    Y(i) = y[i];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
  return beta(1);
}

}  // namespace

TEST_CASE("within transform: single grouping demeans exactly in one pass") {
  Dataset d;
  d.add_column("g", {0, 0, 0, 1, 1, 1});
  d.add_column("x", {1, 2, 3, 10, 20, 30});
  const WithinResult wr = within_transform(d, {"g"}, {"x"});
  CHECK(wr.meta.converged);
  const auto& x = wr.data.column("x");
  CHECK(x[0] == doctest::Approx(-1.0));
  CHECK(x[2] == doctest::Approx(1.0));
  CHECK(x[3] == doctest::Approx(-10.0));
  CHECK(x[5] == doctest::Approx(10.0));
}

TEST_CASE("within transform: balanced orthogonal groupings converge in two sweeps") {
  Dataset d;
  std::vector<double> a, b, x;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) {
      a.push_back(i);
      b.push_back(j);
      x.push_back(3.0 * i - 2.0 * j + 0.25);
    }
  d.add_column("a", std::move(a));
  d.add_column("b", std::move(b));
  d.add_column("x", std::move(x));
  const WithinResult wr = within_transform(d, {"a", "b"}, {"x"});
  CHECK(wr.meta.converged);
  CHECK(wr.meta.iterations <= 2);
  for (double v : wr.data.column("x")) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("within transform rejects degenerate groupings") {
  Dataset d;
  d.add_column("g", {1, 1, 1});
  d.add_column("x", {1, 2, 3});
  CHECK_THROWS_AS(within_transform(d, {"g"}, {"x"}), std::invalid_argument);
}

TEST_CASE("absorbed regression equals brute-force dummy OLS") {
  PanelSpec ps;
  ps.n_authors = 50;
  ps.n_fields = 10;
  ps.periods = 10;
  ps.interaction = 0.35;
  const Dataset d = make_panel(ps);

  RegressionSpec spec;
  spec.outcome = "y";
  spec.form = InteractionForm::PooledPostByRep;
  spec.cluster = "field_id";
  const EventStudyResult fit = fit_event_study(d, spec);
  const double oracle = dummy_ols_interaction(d);
  CHECK(fit.pooled.estimate == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(fit.n_obs == d.n_rows());
  CHECK(fit.n_clusters == 10);
}

TEST_CASE("known interaction is recovered") {
  PanelSpec ps;
  ps.n_authors = 500;
  ps.n_fields = 10;
  ps.interaction = 0.10;
  ps.noise_sd = 0.05;
  const Dataset d = make_panel(ps);

  RegressionSpec spec;
  spec.outcome = "y";
  spec.form = InteractionForm::PooledPostByRep;
  const EventStudyResult fit = fit_event_study(d, spec);
  CHECK(std::abs(fit.pooled.estimate - 0.10) < 0.02);
  CHECK(fit.pooled.se > 0.0);
  CHECK(fit.pooled.p < 0.05);
}

TEST_CASE("one observation per cluster degenerates to the HC form") {
  PanelSpec ps;
  ps.n_authors = 12;
  ps.n_fields = 3;
  ps.periods = 4;
  ps.adoption_base = 2;  // keep post periods inside the short panel
  ps.interaction = 0.2;
  Dataset d = make_panel(ps);
  std::vector<double> row_id(d.n_rows());
  for (std::size_t i = 0; i < row_id.size(); ++i) row_id[i] = static_cast<double>(i);
  d.add_column("row_id", std::move(row_id));

  RegressionSpec spec;
  spec.outcome = "y";
  spec.form = InteractionForm::PooledPostByRep;
  spec.cluster = "row_id";
  const EventStudyResult fit = fit_event_study(d, spec);

  // HC oracle: demean manually, then N/(N-k) (X'e)^2 / (X'X)^2 with the same
  // absorbed-parameter count in k.
  const WithinResult wr =
      within_transform(d, spec.fixed_effects, {std::string("y"), std::string("post")});
  // Rebuild the single regressor exactly as the fit does.
  Dataset work = d;
  {
    const auto& post = d.column("post");
    const auto& rep = d.column("rep_pre");
    std::vector<double> inter(d.n_rows());
    for (std::size_t i = 0; i < inter.size(); ++i) inter[i] = post[i] * rep[i];
    work.add_column("post_x_rep", std::move(inter));
  }
  const WithinResult wd = within_transform(
      work, spec.fixed_effects, {std::string("y"), std::string("post_x_rep")});
  const auto& x = wd.data.column("post_x_rep");
  const auto& y = wd.data.column("y");
  double xx = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    xy += x[i] * y[i];
  }
  const double beta = xy / xx;
  double meat = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - beta * x[i];
    meat += x[i] * x[i] * e * e;
  }
  const double N = static_cast<double>(x.size());
  const double k_total = 1.0 + 12.0 + 2.0 + 3.0;  // slope + absorbed levels
  const double hc = N / (N - k_total) * meat / (xx * xx);
  CHECK(fit.pooled.estimate == doctest::Approx(beta).epsilon(1e-10));
  CHECK(fit.pooled.se * fit.pooled.se == doctest::Approx(hc).epsilon(1e-10));
}

TEST_CASE("event-study contrasts are invariant to the omitted category") {
  PanelSpec ps;
  ps.n_authors = 80;
  ps.n_fields = 8;
  ps.interaction = 0.15;
  const Dataset d = make_panel(ps);

  RegressionSpec spec;
  spec.outcome = "y";
  RegressionSpec alt = spec;
  alt.omitted_event_time = -2;

  const EventStudyResult base = fit_event_study(d, spec);
  const EventStudyResult rebased = fit_event_study(d, alt);
  // Any contrast between two shared event times survives re-basing.
  const double c_base = base.coefficients.at(2).estimate - base.coefficients.at(0).estimate;
  const double c_alt =
      rebased.coefficients.at(2).estimate - rebased.coefficients.at(0).estimate;
  CHECK(c_base == doctest::Approx(c_alt).epsilon(1e-8));
  CHECK(base.coefficients.count(-1) == 0);
  CHECK(rebased.coefficients.count(-2) == 0);
}

TEST_CASE("null DGP: nominal t statistics and uniform pretrend p-values") {
  std::size_t reject_t = 0, total_t = 0;
  std::vector<double> pretrend_ps;
  for (int rep = 0; rep < 400; ++rep) {
    PanelSpec ps;
    ps.n_authors = 160;
    ps.n_fields = 8;
    ps.periods = 10;
    ps.seed = 1000 + static_cast<std::uint64_t>(rep);
    ps.interaction = 0.0;
    ps.noise_sd = 0.1;
    const Dataset d = make_panel(ps);
    RegressionSpec spec;
    spec.outcome = "y";
    spec.cluster = "author_id";  // iid noise; many clusters
    const EventStudyResult fit = fit_event_study(d, spec);
    pretrend_ps.push_back(fit.pretrend_p);
    for (const auto& [k, c] : fit.coefficients) {
      ++total_t;
      if (c.p < 0.05) ++reject_t;
    }
  }
  const double reject_rate = static_cast<double>(reject_t) / static_cast<double>(total_t);
  CHECK(reject_rate < 0.09);  // nominal 5% with sampling slack

  std::sort(pretrend_ps.begin(), pretrend_ps.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < pretrend_ps.size(); ++i) {
    const double emp_hi = static_cast<double>(i + 1) / pretrend_ps.size();
    const double emp_lo = static_cast<double>(i) / pretrend_ps.size();
    ks = std::max({ks, std::abs(emp_hi - pretrend_ps[i]), std::abs(emp_lo - pretrend_ps[i])});
  }
  CHECK(ks < 0.05);
}

TEST_CASE("first stage recovers an exact linear relation") {
  Dataset d;
  std::vector<double> field, period, nullsurv, rr;
  const double mu_f[2] = {0.1, 0.3};
  const double mu_t[4] = {0.0, 0.02, 0.04, 0.06};
  for (int f = 0; f < 2; ++f)
    for (int t = 1; t <= 4; ++t) {
      const double intensity = (t >= (f == 0 ? 2 : 3)) ? 1.0 : 0.0;
      field.push_back(f);
      period.push_back(t);
      rr.push_back(intensity);
      nullsurv.push_back(mu_f[f] + mu_t[t - 1] + 0.5 * intensity);
    }
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("null_survive", std::move(nullsurv));
  d.add_column("rr_intensity", std::move(rr));

  const IVResult fit = fit_first_stage(d);
  CHECK(fit.first_stage_coef == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("2SLS recovers the structural slope and flags weak instruments") {
  CounterRng rng = CounterRng::keyed(9, {12});
  const std::size_t n_fields = 12, periods = 8, authors_per_field = 12;
  std::vector<double> author, field, period, event, post, rep, y, nullsurv, rr;
  const double beta_true = 0.8;
  for (std::size_t f = 0; f < n_fields; ++f) {
    const std::size_t adopt = 3 + (f % 4);
    for (std::size_t t = 1; t <= periods; ++t) {
      const double intensity = t >= adopt ? 1.0 : 0.0;
      const double ns_ft = 0.2 + 0.5 * intensity + rng.uniform(-0.02, 0.02);
      for (std::size_t a = 0; a < authors_per_field; ++a) {
        const std::size_t author_id = f * authors_per_field + a;
        const double rep_i =
            CounterRng::keyed(4, {rng_site::kNoise, author_id}).next_unit();
        author.push_back(static_cast<double>(author_id));
        field.push_back(static_cast<double>(f));
        period.push_back(static_cast<double>(t));
        event.push_back(static_cast<double>(t) - static_cast<double>(adopt));
        post.push_back(intensity);
        rep.push_back(rep_i);
        nullsurv.push_back(ns_ft);
        rr.push_back(intensity);
        y.push_back(0.1 * rep_i + beta_true * ns_ft * rep_i + rng.uniform(-0.05, 0.05));
      }
    }
  }
  Dataset d;
  d.add_column("author_id", std::move(author));
  d.add_column("field_id", std::move(field));
  d.add_column("period", std::move(period));
  d.add_column("event_time", std::move(event));
  d.add_column("post", std::move(post));
  d.add_column("rep_pre", std::move(rep));
  d.add_column("y", std::move(y));
  d.add_column("null_survive", std::move(nullsurv));
  d.add_column("rr_intensity", std::move(rr));

  RegressionSpec spec;
  spec.outcome = "y";
  const IVResult fit = fit_2sls(d, spec);
  CHECK(!fit.weak_instrument_warning);
  CHECK(fit.first_stage_F > 10.0);
  const Coefficient& b = fit.second_stage.at("null_survive_x_rep");
  CHECK(std::abs(b.estimate - beta_true) < 4.0 * b.se + 0.05);

  // Sever the instrument: replace rr_intensity with pure noise.
  Dataset broken = d;
  {
    auto& col = broken.column("rr_intensity");
    CounterRng noise = CounterRng::keyed(5, {6});
    for (auto& v : col) v = noise.next_unit();
  }
  const IVResult weak = fit_2sls(broken, spec);
  CHECK(weak.weak_instrument_warning);
}

TEST_CASE("missing columns are named; degenerate interactions raise") {
  Dataset d;
  d.add_column("author_id", {0, 0, 1, 1});
  d.add_column("field_id", {0, 1, 0, 1});
  d.add_column("period", {1, 2, 1, 2});
  RegressionSpec spec;
  spec.outcome = "y";
  CHECK_THROWS_WITH_AS(fit_event_study(d, spec), "missing required column: y",
                       std::invalid_argument);

  PanelSpec ps;
  ps.n_authors = 30;
  ps.n_fields = 3;
  Dataset flat = make_panel(ps);
  for (auto& v : flat.column("rep_pre")) v = 0.0;  // interactions identically zero
  RegressionSpec pooled;
  pooled.outcome = "y";
  pooled.form = InteractionForm::PooledPostByRep;
  CHECK_THROWS_AS(fit_event_study(flat, pooled), std::runtime_error);
}

TEST_CASE("few clusters raise the warning flag") {
  PanelSpec ps;
  ps.n_authors = 30;
  ps.n_fields = 3;
  ps.interaction = 0.3;
  const Dataset d = make_panel(ps);
  RegressionSpec spec;
  spec.outcome = "y";
  spec.form = InteractionForm::PooledPostByRep;
  const EventStudyResult fit = fit_event_study(d, spec);
  CHECK(fit.n_clusters == 3);
  CHECK(fit.few_clusters_warning);
}

TEST_CASE("coefficient tables render CSV and JSON") {
  PanelSpec ps;
  ps.n_authors = 40;
  ps.n_fields = 4;
  ps.interaction = 0.2;
  const Dataset d = make_panel(ps);
  RegressionSpec spec;
  spec.outcome = "y";
  const EventStudyResult fit = fit_event_study(d, spec);

  const CoefficientTable table = coefficient_table(fit);
  std::ostringstream csv;
  write_coefficient_csv(csv, table);
  CHECK(csv.str().rfind("term,estimate,se,t,p,n_obs,n_clusters\n", 0) == 0);
  CHECK(coefficient_json(table).find("\"terms\"") != std::string::npos);

  std::ostringstream series;
  write_event_series_csv(series, fit);
  CHECK(series.str().rfind("event_time,coef,se\n", 0) == 0);
}
