#include "repvis/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "repvis/util.hpp"

namespace repvis {

namespace {

/// Integer group codes from an id column (values must be exact integers).
std::vector<std::size_t> group_codes(const std::vector<double>& col, std::size_t* n_groups) {
  std::unordered_map<long long, std::size_t> ids;
  std::vector<std::size_t> codes(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    const double v = col[i];
    const long long key = static_cast<long long>(std::llround(v));
    if (std::abs(v - static_cast<double>(key)) > 1e-9)
      throw std::invalid_argument("grouping column holds a non-integer value");
    auto [it, inserted] = ids.try_emplace(key, ids.size());
    codes[i] = it->second;
  }
  *n_groups = ids.size();
  return codes;
}

double students_t_p(double t, double df) {
  if (!(df > 0.0) || !std::isfinite(t)) return std::numeric_limits<double>::quiet_NaN();
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double chi2_p(double stat, double df) {
  if (!(df > 0.0) || !std::isfinite(stat) || stat < 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

struct ClusterOls {
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  double t_df = 1.0;
};

/// OLS of y on the named (already demeaned) columns with a rank-revealing QR
/// and the clustered sandwich.  `absorbed_df` counts fixed-effect levels
/// already swept out, entering the small-sample scaling.
ClusterOls cluster_ols(const Dataset& data, const std::string& outcome,
                       const std::vector<std::string>& regressors,
                       const std::string& cluster, std::size_t absorbed_df) {
  const std::size_t n = data.n_rows();
  const std::size_t k = regressors.size();
  if (n == 0) throw std::invalid_argument("no observations");
  if (k == 0) throw std::invalid_argument("no regressors");

  Eigen::MatrixXd X(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& col = data.column(regressors[j]);
    for (std::size_t i = 0; i < n; ++i) X(i, j) = col[i];
  }
  Eigen::VectorXd y(n);
  {
    const auto& col = data.column(outcome);
    for (std::size_t i = 0; i < n; ++i) y(i) = col[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-9);
  const std::size_t rank = static_cast<std::size_t>(qr.rank());

  ClusterOls fit;
  fit.n_obs = n;
  const auto& perm = qr.colsPermutation().indices();
  std::vector<bool> keep(k, false);
  for (std::size_t r = 0; r < rank; ++r) keep[static_cast<std::size_t>(perm(r))] = true;
  for (std::size_t j = 0; j < k; ++j)
    (keep[j] ? fit.kept : fit.dropped).push_back(regressors[j]);
  if (rank == 0)
    throw std::runtime_error("design matrix has rank zero after absorption; columns: " +
                             fit.dropped.front() + "...");

  Eigen::MatrixXd Xk(n, rank);
  {
    std::size_t jj = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (keep[j]) Xk.col(jj++) = X.col(j);
  }

  const Eigen::MatrixXd xtx = Xk.transpose() * Xk;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  fit.beta = ldlt.solve(Xk.transpose() * y);
  const Eigen::VectorXd resid = y - Xk * fit.beta;

  std::size_t n_clusters = 0;
  const std::vector<std::size_t> cl = group_codes(data.column(cluster), &n_clusters);
  fit.n_clusters = n_clusters;

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, rank);
  for (std::size_t i = 0; i < n; ++i) scores.row(cl[i]) += resid(i) * Xk.row(i);
  const Eigen::MatrixXd meat = scores.transpose() * scores;

  const double G = static_cast<double>(n_clusters);
  const double N = static_cast<double>(n);
  const double k_total = static_cast<double>(rank + absorbed_df);
  double scale = 1.0;
  if (G > 1.0 && N > k_total)
    scale = (G / (G - 1.0)) * ((N - 1.0) / (N - k_total));
  const Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(rank, rank));
  fit.vcov = scale * bread * meat * bread;
  fit.t_df = std::max(1.0, G - 1.0);
  return fit;
}

Coefficient make_coef(double estimate, double variance, double t_df) {
  Coefficient c;
  c.estimate = estimate;
  c.se = variance > 0.0 ? std::sqrt(variance) : 0.0;
  c.t = c.se > 0.0 ? estimate / c.se : std::numeric_limits<double>::quiet_NaN();
  c.p = students_t_p(c.t, t_df);
  return c;
}

int bin_event_time(double event_time, const RegressionSpec& spec) {
  const int k = static_cast<int>(std::llround(event_time));
  return std::clamp(k, spec.window_lo, spec.window_hi);
}

std::size_t absorbed_levels(const Dataset& data, const std::vector<std::string>& fes) {
  std::size_t total = 0;
  bool first = true;
  for (const auto& fe : fes) {
    std::size_t g = 0;
    group_codes(data.column(fe), &g);
    total += first ? g : (g > 0 ? g - 1 : 0);
    first = false;
  }
  return total;
}

}  // namespace

void RegressionSpec::validate() const {
  if (window_lo > window_hi) throw std::invalid_argument("empty event window");
  if (form == InteractionForm::EventStudyByRep &&
      (omitted_event_time < window_lo || omitted_event_time > window_hi))
    throw std::invalid_argument("omitted event time must lie inside the window");
  if (cluster.empty()) throw std::invalid_argument("cluster column required");
}

WithinResult within_transform(const Dataset& data,
                              const std::vector<std::string>& fixed_effects,
                              const std::vector<std::string>& value_columns,
                              double tol, std::size_t max_iterations) {
  if (fixed_effects.empty()) throw std::invalid_argument("no fixed effects given");
  const std::size_t n = data.n_rows();

  struct Grouping {
    std::vector<std::size_t> codes;
    std::size_t n_groups = 0;
  };
  std::vector<Grouping> groupings;
  for (const auto& fe : fixed_effects) {
    Grouping g;
    g.codes = group_codes(data.column(fe), &g.n_groups);
    if (g.n_groups < 2)
      throw std::invalid_argument("fixed effect " + fe + " has fewer than 2 groups");
    groupings.push_back(std::move(g));
  }

  std::vector<std::vector<double>> values;
  for (const auto& name : value_columns) values.push_back(data.column(name));

  WithinMeta meta;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    meta.iterations = it;
    double max_mean = 0.0;
    for (const Grouping& g : groupings) {
      std::vector<double> sum(g.n_groups), cnt(g.n_groups);
      for (auto& col : values) {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          sum[g.codes[i]] += col[i];
          cnt[g.codes[i]] += 1.0;
        }
        for (std::size_t gi = 0; gi < g.n_groups; ++gi) {
          sum[gi] /= cnt[gi];
          max_mean = std::max(max_mean, std::abs(sum[gi]));
        }
        for (std::size_t i = 0; i < n; ++i) col[i] -= sum[g.codes[i]];
      }
    }
    meta.achieved = max_mean;
    if (max_mean < tol) {
      meta.converged = true;
      break;
    }
  }

  WithinResult out;
  out.meta = meta;
  out.data = data;
  for (std::size_t c = 0; c < value_columns.size(); ++c)
    out.data.column(value_columns[c]) = values[c];
  return out;
}

EventStudyResult fit_event_study(const Dataset& data, const RegressionSpec& spec) {
  spec.validate();
  for (const auto& required : {spec.outcome, spec.rep_column, spec.cluster})
    (void)data.column(required);
  for (const auto& fe : spec.fixed_effects) (void)data.column(fe);

  const std::size_t n = data.n_rows();
  const auto& rep = data.column(spec.rep_column);

  Dataset work;
  work.add_column("__y", data.column(spec.outcome));
  std::vector<std::string> regressors;
  std::map<std::string, int> term_event;

  if (spec.form == InteractionForm::EventStudyByRep) {
    const auto& event = data.column("event_time");
    for (int k = spec.window_lo; k <= spec.window_hi; ++k) {
      if (k == spec.omitted_event_time) continue;
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i)
        col[i] = (bin_event_time(event[i], spec) == k) ? rep[i] : 0.0;
      const std::string name = "ev_" + std::to_string(k) + "_x_rep";
      work.add_column(name, std::move(col));
      regressors.push_back(name);
      term_event[name] = k;
    }
  } else {
    const auto& post = data.column("post");
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = post[i] * rep[i];
    work.add_column("post_x_rep", std::move(col));
    regressors.push_back("post_x_rep");
  }
  for (const auto& fe : spec.fixed_effects) work.add_column(fe, data.column(fe));
  if (!work.has_column(spec.cluster)) work.add_column(spec.cluster, data.column(spec.cluster));

  std::vector<std::string> transform_cols = regressors;
  transform_cols.push_back("__y");
  WithinResult wr = within_transform(work, spec.fixed_effects, transform_cols);
  if (!wr.meta.converged)
    throw std::runtime_error("within transform failed to converge; residual mean " +
                             format_double(wr.meta.achieved));

  const std::size_t absorbed = absorbed_levels(data, spec.fixed_effects);
  const ClusterOls fit = cluster_ols(wr.data, "__y", regressors, spec.cluster, absorbed);

  EventStudyResult out;
  out.within = wr.meta;
  out.n_obs = fit.n_obs;
  out.n_clusters = fit.n_clusters;
  out.few_clusters_warning = fit.n_clusters < 5;
  out.dropped_columns = fit.dropped;

  std::map<std::string, std::size_t> kept_index;
  for (std::size_t j = 0; j < fit.kept.size(); ++j) kept_index[fit.kept[j]] = j;

  if (spec.form == InteractionForm::PooledPostByRep) {
    auto it = kept_index.find("post_x_rep");
    if (it == kept_index.end())
      throw std::runtime_error("interaction post_x_rep dropped as rank deficient");
    out.pooled = make_coef(fit.beta(it->second), fit.vcov(it->second, it->second), fit.t_df);
    return out;
  }

  std::vector<std::size_t> lead_idx;
  double sum_early = 0.0, sum_late = 0.0;
  std::size_t n_early = 0, n_late = 0;
  for (const auto& [name, k] : term_event) {
    auto it = kept_index.find(name);
    if (it == kept_index.end()) continue;  // reported via dropped_columns
    const std::size_t j = it->second;
    const Coefficient c = make_coef(fit.beta(j), fit.vcov(j, j), fit.t_df);
    out.coefficients[k] = c;
    if (k < spec.omitted_event_time) lead_idx.push_back(j);
    if (k >= 0 && k <= 2) {
      sum_early += c.estimate;
      ++n_early;
    }
    if (k >= 3 && k <= 5) {
      sum_late += c.estimate;
      ++n_late;
    }
  }
  if (out.coefficients.empty())
    throw std::runtime_error("all event-time interactions dropped as rank deficient");
  out.post_avg_early = n_early ? sum_early / static_cast<double>(n_early) : 0.0;
  out.post_avg_late = n_late ? sum_late / static_cast<double>(n_late) : 0.0;

  if (!lead_idx.empty()) {
    Eigen::VectorXd b(lead_idx.size());
    Eigen::MatrixXd V(lead_idx.size(), lead_idx.size());
    for (std::size_t a = 0; a < lead_idx.size(); ++a) {
      b(a) = fit.beta(lead_idx[a]);
      for (std::size_t c = 0; c < lead_idx.size(); ++c)
        V(a, c) = fit.vcov(lead_idx[a], lead_idx[c]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (lu.isInvertible()) {
      out.pretrend_stat = b.dot(lu.solve(b));
      out.pretrend_df = lead_idx.size();
      out.pretrend_p = chi2_p(out.pretrend_stat, static_cast<double>(out.pretrend_df));
    } else {
      out.pretrend_stat = std::numeric_limits<double>::quiet_NaN();
      out.pretrend_p = std::numeric_limits<double>::quiet_NaN();
      out.pretrend_df = 0;
    }
  }
  return out;
}

IVResult fit_first_stage(const Dataset& field_time_data, const std::string& cluster) {
  for (const auto& required :
       {std::string("null_survive"), std::string("rr_intensity"), std::string("field_id"),
        std::string("period"), cluster})
    (void)field_time_data.column(required);

  const auto& ns_col = field_time_data.column("null_survive");
  Dataset usable = field_time_data.filter(
      [&](std::size_t r) { return std::isfinite(ns_col[r]); });
  if (usable.n_rows() == 0)
    throw std::runtime_error("first stage has no cells with observed null survival");

  Dataset work;
  work.add_column("__y", usable.column("null_survive"));
  work.add_column("rr_intensity", usable.column("rr_intensity"));
  work.add_column("field_id", usable.column("field_id"));
  work.add_column("period", usable.column("period"));
  if (!work.has_column(cluster)) work.add_column(cluster, usable.column(cluster));

  WithinResult wr = within_transform(work, {"field_id", "period"}, {"__y", "rr_intensity"});
  if (!wr.meta.converged)
    throw std::runtime_error("first-stage within transform failed to converge");
  const std::size_t absorbed = absorbed_levels(usable, {"field_id", "period"});
  const ClusterOls fit = cluster_ols(wr.data, "__y", {"rr_intensity"}, cluster, absorbed);
  if (fit.kept.empty() || fit.kept.front() != "rr_intensity")
    throw std::runtime_error("rr_intensity dropped as rank deficient in the first stage");

  IVResult out;
  out.n_obs = fit.n_obs;
  out.n_clusters = fit.n_clusters;
  out.first_stage_coef = fit.beta(0);
  out.first_stage_se = std::sqrt(std::max(0.0, fit.vcov(0, 0)));
  const double t = out.first_stage_se > 0.0 ? out.first_stage_coef / out.first_stage_se : 0.0;
  out.first_stage_F = t * t;
  out.weak_instrument_warning = out.first_stage_F < 10.0;
  return out;
}

IVResult fit_2sls(const Dataset& data, const RegressionSpec& spec) {
  for (const auto& required : {spec.outcome, spec.rep_column, spec.cluster,
                               std::string("null_survive"), std::string("rr_intensity")})
    (void)data.column(required);
  for (const auto& fe : spec.fixed_effects) (void)data.column(fe);

  const auto& nsv = data.column("null_survive");
  Dataset usable = data.filter([&](std::size_t r) { return std::isfinite(nsv[r]); });
  if (usable.n_rows() == 0)
    throw std::runtime_error("2SLS sample is empty after dropping missing null_survive");

  const std::size_t n = usable.n_rows();
  const auto& rep = usable.column(spec.rep_column);
  const auto& endog_raw = usable.column("null_survive");
  const auto& instr_raw = usable.column("rr_intensity");

  Dataset work;
  work.add_column("__y", usable.column(spec.outcome));
  std::vector<double> endog(n), instr(n);
  for (std::size_t i = 0; i < n; ++i) {
    endog[i] = endog_raw[i] * rep[i];
    instr[i] = instr_raw[i] * rep[i];
  }
  work.add_column("__x", std::move(endog));
  work.add_column("__z", std::move(instr));
  for (const auto& fe : spec.fixed_effects) work.add_column(fe, usable.column(fe));
  if (!work.has_column(spec.cluster)) work.add_column(spec.cluster, usable.column(spec.cluster));

  WithinResult wr = within_transform(work, spec.fixed_effects, {"__y", "__x", "__z"});
  if (!wr.meta.converged)
    throw std::runtime_error("2SLS within transform failed to converge");

  const auto& y = wr.data.column("__y");
  const auto& x = wr.data.column("__x");
  const auto& z = wr.data.column("__z");

  double zx = 0.0, zy = 0.0, zz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zx += z[i] * x[i];
    zy += z[i] * y[i];
    zz += z[i] * z[i];
  }
  if (std::abs(zx) < 1e-12 || zz < 1e-12)
    throw std::runtime_error("instrument has no leverage on the endogenous interaction");

  IVResult out;
  std::size_t n_clusters = 0;
  const std::vector<std::size_t> cl = group_codes(wr.data.column(spec.cluster), &n_clusters);
  out.n_obs = n;
  out.n_clusters = n_clusters;
  const double G = static_cast<double>(n_clusters);
  const double N = static_cast<double>(n);
  const std::size_t absorbed = absorbed_levels(usable, spec.fixed_effects);
  const double k_total = 1.0 + static_cast<double>(absorbed);
  const double scale =
      (G > 1.0 && N > k_total) ? (G / (G - 1.0)) * ((N - 1.0) / (N - k_total)) : 1.0;
  const double t_df = std::max(1.0, G - 1.0);

  // First stage on the excluded instrument.
  const double phi = zx / zz;
  {
    std::vector<double> cluster_sum(n_clusters, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      cluster_sum[cl[i]] += z[i] * (x[i] - phi * z[i]);
    double meat = 0.0;
    for (double s : cluster_sum) meat += s * s;
    const double var = scale * meat / (zz * zz);
    out.first_stage_coef = phi;
    out.first_stage_se = std::sqrt(std::max(0.0, var));
    const double t = out.first_stage_se > 0.0 ? phi / out.first_stage_se : 0.0;
    out.first_stage_F = t * t;
    out.weak_instrument_warning = out.first_stage_F < 10.0;
  }

  // Just-identified IV estimate with residuals from the structural equation.
  const double beta = zy / zx;
  {
    std::vector<double> cluster_sum(n_clusters, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      cluster_sum[cl[i]] += z[i] * (y[i] - beta * x[i]);
    double meat = 0.0;
    for (double s : cluster_sum) meat += s * s;
    const double var = scale * meat / (zx * zx);
    out.second_stage["null_survive_x_rep"] = make_coef(beta, var, t_df);
  }
  return out;
}

CoefficientTable coefficient_table(const EventStudyResult& result) {
  CoefficientTable t;
  t.n_obs = result.n_obs;
  t.n_clusters = result.n_clusters;
  if (!result.coefficients.empty()) {
    for (const auto& [k, c] : result.coefficients)
      t.rows.push_back({"event[" + std::to_string(k) + "]x rep", c});
  } else {
    t.rows.push_back({"post_x_rep", result.pooled});
  }
  return t;
}

CoefficientTable coefficient_table(const IVResult& result) {
  CoefficientTable t;
  t.n_obs = result.n_obs;
  t.n_clusters = result.n_clusters;
  Coefficient first;
  first.estimate = result.first_stage_coef;
  first.se = result.first_stage_se;
  first.t = first.se > 0.0 ? first.estimate / first.se : 0.0;
  first.p = std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back({"first_stage:rr_intensity", first});
  for (const auto& [term, c] : result.second_stage) t.rows.push_back({term, c});
  return t;
}

void write_coefficient_csv(std::ostream& os, const CoefficientTable& table) {
  os << "term,estimate,se,t,p,n_obs,n_clusters\n";
  for (const auto& row : table.rows)
    os << row.term << ',' << format_double(row.coef.estimate) << ','
       << format_double(row.coef.se) << ',' << format_double(row.coef.t) << ','
       << format_double(row.coef.p) << ',' << table.n_obs << ',' << table.n_clusters
       << '\n';
}

std::string coefficient_json(const CoefficientTable& table) {
  nlohmann::json j;
  j["n_obs"] = table.n_obs;
  j["n_clusters"] = table.n_clusters;
  auto& rows = j["terms"] = nlohmann::json::array();
  for (const auto& row : table.rows)
    rows.push_back({{"term", row.term},
                    {"estimate", row.coef.estimate},
                    {"se", row.coef.se},
                    {"t", row.coef.t},
                    {"p", row.coef.p}});
  return j.dump(2);
}

void write_event_series_csv(std::ostream& os, const EventStudyResult& result) {
  os << "event_time,coef,se\n";
  for (const auto& [k, c] : result.coefficients)
    os << k << ',' << format_double(c.estimate) << ',' << format_double(c.se) << '\n';
}

}  // namespace repvis
