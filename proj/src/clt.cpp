#include "extremo/clt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <thread>

#include "extremo/detail/normal.hpp"
#include "extremo/io.hpp"
#include "extremo/rng.hpp"

namespace extremo {

namespace {

void set_flags(SequencePlan& p) {
  p.a_m = std::pow(static_cast<double>(p.m), p.d);
  p.m2_ok = p.beta1 + p.beta2 < 0.5;
  p.logm_o_r = p.beta2 > 0.0;
  p.logn_o_r = p.beta2 > 0.0;
  p.bias_ok = p.beta1 > 1.0 / 3.0;
  p.clt_window = p.bias_ok && p.m2_ok && p.beta1 < 0.5 && p.beta2 > 0.0 && p.beta2 < p.beta1;
}

void check_sizes(int n, int d, int m, int r) {
  if (n < 2) throw DomainError("plan: n must be >= 2");
  if (d < 1) throw DomainError("plan: d must be >= 1");
  if (!(m < n)) throw DomainError("plan: m = " + std::to_string(m) + " must be < n");
  if (!(r < m)) throw DomainError("plan: r = " + std::to_string(r) + " must be < m");
  if (r < 1) throw DomainError("plan: r must be >= 1");
}

}  // namespace

SequencePlan plan(int n, int d, double beta1, double beta2) {
  if (!(beta2 > 0.0 && beta2 < beta1 && beta1 < 1.0))
    throw DomainError("plan: need 0 < beta2 < beta1 < 1");
  SequencePlan p;
  p.n = n;
  p.d = d;
  p.beta1 = beta1;
  p.beta2 = beta2;
  p.m = static_cast<int>(std::lround(std::pow(static_cast<double>(n), beta1)));
  p.r = static_cast<int>(std::lround(std::pow(static_cast<double>(n), beta2)));
  check_sizes(n, d, p.m, p.r);
  set_flags(p);
  return p;
}

SequencePlan plan_explicit(int n, int d, int m, int r) {
  check_sizes(n, d, m, r);
  SequencePlan p;
  p.n = n;
  p.d = d;
  p.m = m;
  p.r = r;
  p.beta1 = std::log(static_cast<double>(m)) / std::log(static_cast<double>(n));
  p.beta2 = std::log(static_cast<double>(r)) / std::log(static_cast<double>(n));
  set_flags(p);
  return p;
}

// ---------------------------------------------------------------------------
// Models

ModelSpec::ModelSpec(Variant model, BrSimulationConfig br_config)
    : model_(std::move(model)), br_config_(br_config) {}

GridField ModelSpec::simulate(const Grid& grid, std::uint64_t seed) const {
  if (auto d = dim(); d && *d != grid.d())
    throw DomainError("model dimension does not match the grid");
  if (std::holds_alternative<MmaModel>(model_))
    return simulate_mma(std::get<MmaModel>(model_), grid, seed);
  if (std::holds_alternative<BrModel>(model_))
    return simulate_brown_resnick(std::get<BrModel>(model_), grid, seed, br_config_);
  return simulate_iid_frechet(grid, seed);
}

BivariateExponent ModelSpec::exponent() const {
  if (std::holds_alternative<MmaModel>(model_))
    return MmaTheory(std::get<MmaModel>(model_)).exponent();
  if (std::holds_alternative<BrModel>(model_))
    return br_exponent(std::get<BrModel>(model_).variogram);
  return independent_exponent();
}

std::string ModelSpec::tag() const {
  if (std::holds_alternative<MmaModel>(model_)) return std::get<MmaModel>(model_).tag();
  if (std::holds_alternative<BrModel>(model_)) return std::get<BrModel>(model_).tag();
  return "iid";
}

std::optional<int> ModelSpec::dim() const {
  if (std::holds_alternative<MmaModel>(model_)) return std::get<MmaModel>(model_).d;
  if (std::holds_alternative<BrModel>(model_)) return std::get<BrModel>(model_).d;
  return std::nullopt;
}

std::string to_string(Center center) {
  return center == Center::preasymptotic ? "pre" : "true";
}

Center parse_center(const std::string& text) {
  if (text == "pre" || text == "preasymptotic") return Center::preasymptotic;
  if (text == "true") return Center::true_value;
  throw DomainError("unknown centering '" + text + "' (expected pre or true)");
}

// ---------------------------------------------------------------------------
// Diagnostics

NormalityDiagnostics normality_diagnostics(const std::vector<double>& samples,
                                           std::optional<double> reference_variance,
                                           const NormalityThresholds& thresholds) {
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n < 100)
    throw DomainError("normality diagnostics need at least 100 samples, got " +
                      std::to_string(n));
  NormalityDiagnostics out;
  out.samples = n;
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.mean = sum / nn;
  double ss = 0.0;
  for (double x : samples) ss += (x - out.mean) * (x - out.mean);
  out.variance = ss / (nn - 1.0);
  out.ks_threshold = thresholds.ks_coefficient / std::sqrt(nn);
  out.variance_ratio = reference_variance ? out.variance / *reference_variance
                                          : std::numeric_limits<double>::quiet_NaN();

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  if (!(out.variance > 0.0)) {
    out.ks_distance = 1.0;
    out.qq_correlation = 0.0;
    return out;
  }
  const double sd = std::sqrt(out.variance);
  double ks = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double f = detail::normal_cdf((sorted[i] - out.mean) / sd);
    ks = std::max({ks, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  out.ks_distance = ks;
  out.ks_pass = ks < out.ks_threshold;

  std::vector<double> q(samples.size());
  double qmean = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    q[i] = detail::normal_quantile((static_cast<double>(i + 1) - 0.375) / (nn + 0.25));
    qmean += q[i];
  }
  qmean /= nn;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double dx = sorted[i] - out.mean;
    const double dy = q[i] - qmean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  out.qq_correlation = sxy / std::sqrt(sxx * syy);
  out.qq_pass = out.qq_correlation > thresholds.qq_correlation;
  return out;
}

// ---------------------------------------------------------------------------
// Plug-in estimates

namespace {

std::vector<BallEvent> lag_events(const LagEventSets& sets) {
  std::vector<BallEvent> events;
  for (std::size_t i = 0; i < sets.lags.size(); ++i) events.push_back(sets.d_pair(i));
  events.push_back(sets.d_exceed());
  return events;
}

}  // namespace

Eigen::VectorXd mu_plugin(const GridField& field, const LagEventSets& sets, int m,
                          double level) {
  const std::vector<BallEvent> events = lag_events(sets);
  Eigen::VectorXd mu(static_cast<Eigen::Index>(events.size()));
  for (std::size_t i = 0; i < events.size(); ++i)
    mu[static_cast<Eigen::Index>(i)] =
        mu_hat(field, events[i], sets.lags.gamma(), m, level, Support::full_balls,
               sets.lags.norm_kind());
  return mu;
}

Eigen::MatrixXd sigma_plugin(const GridField& field, const LagEventSets& sets, int m,
                             double level, int r_trunc) {
  if (r_trunc < 0) throw DomainError("sigma_plugin: r_trunc must be >= 0");
  const std::vector<BallEvent> events = lag_events(sets);
  const double gamma = sets.lags.gamma();
  const Norm kind = sets.lags.norm_kind();
  std::vector<Lag> shifts;
  for (Lag& l : ball(Lag(field.grid.d(), 0), r_trunc, kind))
    if (std::any_of(l.begin(), l.end(), [](int c) { return c != 0; }))
      shifts.push_back(std::move(l));

  const auto k = static_cast<Eigen::Index>(events.size());
  Eigen::MatrixXd sigma(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      const BallEvent& ci = events[static_cast<std::size_t>(i)];
      const BallEvent& cj = events[static_cast<std::size_t>(j)];
      double value = mu_hat(field, ci & cj, gamma, m, level, Support::full_balls, kind);
      for (const Lag& l : shifts)
        value += tau_hat(field, ci, cj, l, gamma, m, level, Support::full_balls, kind);
      sigma(i, j) = value;
      sigma(j, i) = value;
    }
  return sigma;
}

Eigen::MatrixXd pi_matrix(const Eigen::MatrixXd& sigma, double mu_a,
                          const Eigen::VectorXd& mu_d) {
  if (!(mu_a > 0.0)) throw DomainError("pi_matrix: mu(A) must be positive");
  const Eigen::Index p = mu_d.size();
  if (sigma.rows() != p + 1 || sigma.cols() != p + 1)
    throw DomainError("pi_matrix: Sigma must be (p+1) x (p+1)");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(p, p + 1);
  f.leftCols(p).diagonal().setConstant(mu_a);
  f.col(p) = -mu_d;
  const Eigen::MatrixXd pi = f * sigma * f.transpose() / std::pow(mu_a, 4);
  return (pi + pi.transpose()) / 2.0;
}

// ---------------------------------------------------------------------------
// Monte Carlo harness

namespace {

struct Outcome {
  bool discarded = false;
  std::vector<double> rho;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  std::exception_ptr error;
};

std::string describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

CltReport scaled_deviations(const ModelSpec& model, const SequencePlan& plan,
                            const CltConfig& config) {
  const LagEventSets& sets = config.sets;
  if (config.reps < 1) throw DomainError("reps must be >= 1");
  if (config.jobs < 1) throw DomainError("jobs must be >= 1");
  if (sets.lags.dim() != plan.d) throw DomainError("lag dimension does not match the plan");
  if (auto d = model.dim(); d && *d != plan.d)
    throw DomainError("model dimension does not match the plan");
  const int r_trunc = config.r_trunc.value_or(plan.r);
  if (r_trunc < 0 || r_trunc > plan.r)
    throw DomainError("r_trunc must lie in [0, r]");

  CltReport report;
  report.plan = plan;
  report.model_tag = model.tag();
  report.center = config.center;
  report.lags = sets.lags.lags();
  report.a = sets.a;
  report.b = sets.b;
  report.master_seed = config.master_seed;
  report.r_trunc = r_trunc;
  report.requested = config.reps;

  const BivariateExponent v2 = model.exponent();
  const auto p = static_cast<Eigen::Index>(sets.lags.size());
  for (const Lag& h : sets.lags.lags()) {
    const double truth = true_extremogram(v2, h, sets.a, sets.b);
    report.rho_true.push_back(truth);
    report.rho_center.push_back(config.center == Center::true_value
                                    ? truth
                                    : preasymptotic_exact(v2, h, sets.a, sets.b, plan.m, plan.d));
  }

  const Grid grid(plan.n, plan.d);
  std::vector<Outcome> outcomes(static_cast<std::size_t>(config.reps));
  auto run_one = [&](std::int64_t i) {
    Outcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      const GridField field = model.simulate(grid, derive_seed(config.master_seed,
                                                                static_cast<std::uint64_t>(i)));
      out.rho = empirical_extremogram(field, sets.lags, sets.a, sets.b, plan.a_m).values;
      if (config.plugin) {
        out.mu = mu_plugin(field, sets, plan.m, plan.a_m);
        out.sigma = sigma_plugin(field, sets, plan.m, plan.a_m, r_trunc);
      }
    } catch (const NoExceedances&) {
      out.discarded = true;
    } catch (...) {
      out.error = std::current_exception();
    }
  };

  const int workers = std::min(config.jobs, config.reps);
  if (workers == 1) {
    for (std::int64_t i = 0; i < config.reps; ++i) run_one(i);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::int64_t i = next++; i < config.reps; i = next++) run_one(i);
      });
    for (std::thread& t : pool) t.join();
  }

  for (std::int64_t i = 0; i < config.reps; ++i) {
    const Outcome& out = outcomes[static_cast<std::size_t>(i)];
    if (out.error) throw ReplicateError(i, describe(out.error));
    (out.discarded ? report.discarded : report.kept).push_back(i);
  }
  const auto kept = static_cast<Eigen::Index>(report.kept.size());
  if (kept < 2) throw Error("fewer than two replicates had exceedances");

  const double scale = std::pow(static_cast<double>(plan.n) / plan.m, plan.d / 2.0);
  report.rho_hat.resize(kept, p);
  report.deviations.resize(kept, p);
  for (Eigen::Index k = 0; k < kept; ++k) {
    const Outcome& out = outcomes[static_cast<std::size_t>(report.kept[k])];
    for (Eigen::Index j = 0; j < p; ++j) {
      report.rho_hat(k, j) = out.rho[static_cast<std::size_t>(j)];
      report.deviations(k, j) =
          scale * (out.rho[static_cast<std::size_t>(j)] - report.rho_center[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::MatrixXd centered =
      report.deviations.rowwise() - report.deviations.colwise().mean();
  report.pi_mc = centered.transpose() * centered / static_cast<double>(kept - 1);

  if (config.plugin) {
    report.has_plugin = true;
    report.mu_hat = Eigen::VectorXd::Zero(p + 1);
    report.sigma_hat = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (std::int64_t i : report.kept) {
      report.mu_hat += outcomes[static_cast<std::size_t>(i)].mu;
      report.sigma_hat += outcomes[static_cast<std::size_t>(i)].sigma;
    }
    report.mu_hat /= static_cast<double>(kept);
    report.sigma_hat /= static_cast<double>(kept);
    const double mu_a = report.mu_hat[p];
    report.f = Eigen::MatrixXd::Zero(p, p + 1);
    report.f.leftCols(p).diagonal().setConstant(mu_a);
    report.f.col(p) = -report.mu_hat.head(p);
    if (mu_a > 0.0) report.pi_hat = pi_matrix(report.sigma_hat, mu_a, report.mu_hat.head(p));
  }

  if (kept >= 100) {
    for (Eigen::Index j = 0; j < p; ++j) {
      std::vector<double> column(report.deviations.col(j).begin(),
                                 report.deviations.col(j).end());
      std::optional<double> reference;
      if (report.pi_hat.size() > 0) reference = report.pi_hat(j, j);
      report.diagnostics.push_back(normality_diagnostics(column, reference, config.thresholds));
    }
  }
  return report;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string clt_report_to_json(const CltReport& r) {
  nlohmann::ordered_json j;
  const SequencePlan& p = r.plan;
  j["plan"] = {{"n", p.n},           {"d", p.d},
               {"beta1", p.beta1},   {"beta2", p.beta2},
               {"m", p.m},           {"r", p.r},
               {"a_m", p.a_m},       {"M2_ok", p.m2_ok},
               {"logm_o_r", p.logm_o_r}, {"logn_o_r", p.logn_o_r},
               {"bias_ok", p.bias_ok},   {"clt_window", p.clt_window}};
  j["model"] = r.model_tag;
  j["center"] = to_string(r.center);
  j["A"] = r.a.to_string();
  j["B"] = r.b.to_string();
  j["master_seed"] = r.master_seed;
  j["r_trunc"] = r.r_trunc;
  j["replicates"] = {{"requested", r.requested},
                     {"kept", r.kept.size()},
                     {"discarded", r.discarded.size()},
                     {"discarded_indices", r.discarded}};
  auto& lags = j["lags"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.lags.size(); ++i) {
    nlohmann::ordered_json row;
    const auto col = static_cast<Eigen::Index>(i);
    row["h"] = r.lags[i];
    row["rho_center"] = r.rho_center[i];
    row["rho_true"] = r.rho_true[i];
    row["mean_rho_hat"] = r.rho_hat.col(col).mean();
    row["mean_deviation"] = r.deviations.col(col).mean();
    if (i < r.diagnostics.size()) {
      const NormalityDiagnostics& g = r.diagnostics[i];
      row["diagnostics"] = {{"samples", g.samples},
                            {"mean", g.mean},
                            {"variance", g.variance},
                            {"ks_distance", g.ks_distance},
                            {"ks_threshold", g.ks_threshold},
                            {"ks_pass", g.ks_pass},
                            {"qq_correlation", g.qq_correlation},
                            {"qq_pass", g.qq_pass},
                            {"variance_ratio", g.variance_ratio}};
    }
    lags.push_back(std::move(row));
  }
  j["pi_mc"] = matrix_json(r.pi_mc);
  if (r.has_plugin) {
    j["mu_hat"] = std::vector<double>(r.mu_hat.begin(), r.mu_hat.end());
    j["sigma_hat"] = matrix_json(r.sigma_hat);
    j["F"] = matrix_json(r.f);
    j["pi_hat"] = matrix_json(r.pi_hat);
  }
  j["samples"] = {{"replicate", r.kept},
                  {"rho_hat", matrix_json(r.rho_hat.transpose())},
                  {"deviation", matrix_json(r.deviations.transpose())}};
  return j.dump(2);
}

void write_clt_samples_csv(const CltReport& r, std::ostream& out) {
  const std::size_t d = r.lags.empty() ? 1 : r.lags.front().size();
  out << "replicate,";
  for (std::size_t j = 0; j < d; ++j) out << "h" << (j + 1) << ",";
  out << "rho_hat,deviation\n";
  for (Eigen::Index k = 0; k < r.rho_hat.rows(); ++k)
    for (std::size_t i = 0; i < r.lags.size(); ++i) {
      out << r.kept[static_cast<std::size_t>(k)] << ",";
      for (int c : r.lags[i]) out << c << ",";
      const auto col = static_cast<Eigen::Index>(i);
      out << io::format_double(r.rho_hat(k, col)) << ","
          << io::format_double(r.deviations(k, col)) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Bias

std::vector<BiasRow> bias_curve(const BivariateExponent& v2, const Lag& h,
                                const IntervalSet& a, const IntervalSet& b, int d,
                                const std::vector<double>& beta1s,
                                const std::vector<int>& ns) {
  const double truth = true_extremogram(v2, h, a, b);
  const double coef = taylor_coefficient(truth, v2, h, a, b);
  std::vector<BiasRow> rows;
  for (double beta1 : beta1s) {
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw DomainError("bias_curve: beta1 must lie in (0, 1)");
    for (int n : ns) {
      const int m = static_cast<int>(std::lround(std::pow(static_cast<double>(n), beta1)));
      if (m < 2) throw DomainError("bias_curve: m = round(n^beta1) must be >= 2");
      BiasRow row;
      row.h = h;
      row.n = n;
      row.beta1 = beta1;
      row.m = m;
      row.rho_true = truth;
      row.rho_pre = preasymptotic_exact(v2, h, a, b, m, d);
      const double nn = static_cast<double>(n);
      const double mm = static_cast<double>(m);
      row.scaled_bias = std::pow(nn / mm, d / 2.0) * (row.rho_pre - truth);
      row.predicted = std::pow(nn / (mm * mm * mm), d / 2.0) * coef / 2.0;
      row.ratio = row.scaled_bias / row.predicted;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bias_csv(const std::vector<BiasRow>& rows, std::ostream& out) {
  const std::size_t d = rows.empty() ? 1 : rows.front().h.size();
  for (std::size_t j = 0; j < d; ++j) out << "h" << (j + 1) << ",";
  out << "n,beta1,m,rho_pre,rho_true,scaled_bias,predicted,ratio\n";
  for (const BiasRow& r : rows) {
    for (int c : r.h) out << c << ",";
    out << r.n << "," << io::format_double(r.beta1) << "," << r.m << ","
        << io::format_double(r.rho_pre) << "," << io::format_double(r.rho_true) << ","
        << io::format_double(r.scaled_bias) << "," << io::format_double(r.predicted) << ","
        << io::format_double(r.ratio) << "\n";
  }
}

}  // namespace extremo
