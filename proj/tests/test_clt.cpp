#include <catch_amalgamated.hpp>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "extremo/clt.hpp"
#include "extremo/rng.hpp"

using namespace extremo;
using Catch::Approx;

namespace {

LagEventSets ray_sets(std::vector<Lag> lags, double gamma) {
  return LagEventSets{LagSet(std::move(lags), gamma), IntervalSet(1.0), IntervalSet(1.0)};
}

CltConfig make_config(LagEventSets sets, int reps, std::uint64_t seed, int jobs = 1) {
  return CltConfig{std::move(sets), reps, seed, Center::preasymptotic, jobs, true, std::nullopt, {}};
}

}  // namespace

TEST_CASE("sequence plans") {
  const SequencePlan p = plan(10000, 1, 0.4, 0.05);
  CHECK(p.m == 40);
  CHECK(p.r == 2);
  CHECK(p.a_m == 40.0);
  CHECK(p.m2_ok);
  CHECK(p.bias_ok);
  CHECK(p.clt_window);

  const SequencePlan slow = plan(10000, 2, 0.25, 0.05);
  CHECK(slow.a_m == 100.0);
  CHECK_FALSE(slow.bias_ok);
  CHECK_FALSE(slow.clt_window);
  CHECK_FALSE(plan(10000, 1, 0.45, 0.1).m2_ok);
  CHECK_FALSE(plan(10000, 1, 0.45, 0.1).clt_window);

  CHECK_THROWS_AS(plan(10000, 1, 0.3, 0.4), DomainError);
  CHECK_THROWS_AS(plan(10000, 1, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(plan_explicit(10, 1, 10, 2), DomainError);
  CHECK_THROWS_AS(plan_explicit(10, 1, 5, 5), DomainError);
  CHECK_THROWS_AS(plan_explicit(10, 1, 5, 0), DomainError);
  CHECK_THROWS_AS(plan_explicit(1, 1, 5, 1), DomainError);

  const SequencePlan e = plan_explicit(10000, 1, 100, 10);
  CHECK(e.beta1 == Approx(0.5));
  CHECK(e.beta2 == Approx(0.25));
}

TEST_CASE("the CLT window is the conjunction of the rate conditions") {
  for (int i = 1; i < 60; ++i)
    for (int j = 1; j < i; ++j) {
      const double b1 = i / 60.0, b2 = j / 60.0;
      const SequencePlan p = plan(1 << 30, 1, b1, b2);
      CHECK(p.clt_window == (p.m2_ok && p.bias_ok && p.logn_o_r && b1 < 0.5));
      CHECK(p.m2_ok == (b1 + b2 < 0.5));
    }
}

TEST_CASE("pi matrix") {
  for (double rho : {0.0, 0.25, 0.5, 0.75}) {
    const Eigen::MatrixXd pi =
        pi_matrix(Eigen::MatrixXd::Identity(2, 2), 1.0, Eigen::VectorXd::Constant(1, rho));
    CHECK(pi(0, 0) == 1.0 + rho * rho);
  }
  Eigen::MatrixXd sigma(3, 3);
  sigma << 2.0, 0.5, 0.3, 0.5, 1.5, 0.2, 0.3, 0.2, 1.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd plain = pi_matrix(sigma, 2.0, zero);
  CHECK(plain.isApprox(sigma.topLeftCorner(2, 2) / 4.0, 1e-15));

  const Eigen::VectorXd mu = Eigen::Vector2d(0.4, 0.1);
  const Eigen::MatrixXd once = pi_matrix(sigma, 1.3, mu);
  CHECK(pi_matrix(3.0 * sigma, 1.3, mu).isApprox(3.0 * once, 1e-14));
  CHECK(once.isApprox(once.transpose(), 0.0));

  CHECK_THROWS_AS(pi_matrix(sigma, 0.0, mu), DomainError);
  CHECK_THROWS_AS(pi_matrix(sigma, 1.0, Eigen::VectorXd::Zero(3)), DomainError);
}

TEST_CASE("normality diagnostics") {
  Philox4x32 eng(10);
  NormalSampler normal;
  std::vector<double> gauss, uniform;
  for (int i = 0; i < 5000; ++i) {
    gauss.push_back(2.0 + 3.0 * normal(eng));
    uniform.push_back(uniform_open01(eng));
  }
  const auto g = normality_diagnostics(gauss, 9.0);
  CHECK(g.ks_pass);
  CHECK(g.qq_pass);
  CHECK(g.ks_threshold == Approx(1.36 / std::sqrt(5000.0)));
  CHECK(g.variance_ratio == Approx(1.0).epsilon(0.05));
  CHECK(g.mean == Approx(2.0).margin(0.15));

  const auto u = normality_diagnostics(uniform);
  CHECK_FALSE(u.ks_pass);
  CHECK_FALSE(u.qq_pass);
  CHECK(std::isnan(u.variance_ratio));

  const auto flat = normality_diagnostics(std::vector<double>(100, 1.0));
  CHECK_FALSE(flat.ks_pass);
  CHECK_FALSE(flat.qq_pass);
  CHECK_THROWS_AS(normality_diagnostics(std::vector<double>(99, 1.0)), DomainError);
}

TEST_CASE("replicates are reproducible and independent of the worker count") {
  const SequencePlan p = plan_explicit(2000, 1, 20, 2);
  const auto sets = ray_sets({Lag{1}, Lag{2}}, 2.0);
  const CltReport one = scaled_deviations(ModelSpec::iid(), p, make_config(sets, 40, 3, 1));
  const CltReport again = scaled_deviations(ModelSpec::iid(), p, make_config(sets, 40, 3, 1));
  const CltReport three = scaled_deviations(ModelSpec::iid(), p, make_config(sets, 40, 3, 3));
  CHECK(one.deviations == again.deviations);
  CHECK(one.deviations == three.deviations);
  CHECK(one.pi_hat == three.pi_hat);
  CHECK(clt_report_to_json(one) == clt_report_to_json(three));

  const GridField f = simulate_iid_frechet(Grid(2000, 1), derive_seed(3, 7));
  const auto series = empirical_extremogram(f, sets.lags, sets.a, sets.b, 20.0);
  CHECK(one.rho_hat(7, 0) == series.values[0]);
  CHECK(one.rho_hat(7, 1) == series.values[1]);
}

TEST_CASE("iid deviations are centred at the pre-asymptotic extremogram") {
  const SequencePlan p = plan_explicit(2000, 1, 20, 2);
  const CltReport r =
      scaled_deviations(ModelSpec::iid(), p, make_config(ray_sets({Lag{1}}, 1.0), 500, 11));
  CHECK(r.rho_center[0] == Approx(1.0 - std::exp(-1.0 / 20.0)).epsilon(1e-12));
  CHECK(r.rho_true[0] == 0.0);
  const double mean = r.deviations.col(0).mean();
  const double se = std::sqrt(r.pi_mc(0, 0) / r.deviations.rows());
  CHECK(std::abs(mean) < 3 * se);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].samples == 500);
}

TEST_CASE("replicates without exceedances are discarded") {
  const SequencePlan p = plan_explicit(20, 1, 19, 1);
  const CltReport r =
      scaled_deviations(ModelSpec::iid(), p, make_config(ray_sets({Lag{1}}, 1.0), 60, 2));
  CHECK(r.requested == 60);
  CHECK(r.kept.size() + r.discarded.size() == 60);
  CHECK_FALSE(r.discarded.empty());
  CHECK(std::is_sorted(r.kept.begin(), r.kept.end()));
  CHECK(r.rho_hat.rows() == static_cast<Eigen::Index>(r.kept.size()));
  CHECK(r.diagnostics.empty());
  for (std::int64_t i : r.discarded) {
    const GridField f = simulate_iid_frechet(Grid(20, 1), derive_seed(2, static_cast<std::uint64_t>(i)));
    CHECK((f.values <= 19.0).all());
  }
  const auto j = nlohmann::json::parse(clt_report_to_json(r));
  CHECK(j["replicates"]["discarded"] == r.discarded.size());
}

TEST_CASE("replicate failures surface with their index") {
  BrSimulationConfig tight;
  tight.stopping = BrStopping::quantile;
  tight.max_points = 10;
  const ModelSpec model(BrModel(Variogram(2.0, 1.0), 1), tight);
  const SequencePlan p = plan_explicit(30, 1, 5, 1);
  try {
    scaled_deviations(model, p, make_config(ray_sets({Lag{1}}, 1.0), 4, 1, 2));
    FAIL("expected ReplicateError");
  } catch (const ReplicateError& e) {
    CHECK(e.index() == 0);
  }
  CHECK_THROWS_AS(scaled_deviations(ModelSpec::iid(), p, make_config(ray_sets({Lag{1, 0}}, 1.0), 4, 1)),
                  DomainError);
}

TEST_CASE("sigma plug-in against the MMA exponent measure") {
  // With R = 2 and lag reach 1, events more than 6 apart are independent.
  const MmaModel model(0.5, 1, 2);
  const MmaTheory theory(model);
  const int n = 1000000, m = 1000;
  const GridField f = simulate_mma(model, Grid(n, 1), 5);
  const auto sets = ray_sets({Lag{1}}, 1.0);
  const Eigen::MatrixXd near = sigma_plugin(f, sets, m, m, 7);
  const Eigen::MatrixXd far = sigma_plugin(f, sets, m, m, 14);
  CHECK(near.isApprox(near.transpose(), 0.0));
  CHECK((far - near).cwiseAbs().maxCoeff() < 0.05);

  // Sigma for the exceedance event: sum over all l of tau(A x A; l) = 2 - theta(l).
  double expected = 0.0;
  for (int l = -4; l <= 4; ++l) expected += 2.0 - theory.theta(Lag{l});
  CHECK(near(1, 1) == Approx(expected).epsilon(0.15));

  const Eigen::VectorXd mu = mu_plugin(f, sets, m, m);
  CHECK(mu[1] == Approx(1.0).epsilon(0.1));
  CHECK(mu[0] == Approx(true_extremogram(theory.exponent(), Lag{1}, sets.a, sets.b)).epsilon(0.15));
  CHECK_THROWS_AS(sigma_plugin(f, sets, m, m, -1), DomainError);
}

TEST_CASE("sigma plug-in for independent sites") {
  const GridField f = simulate_iid_frechet(Grid(200000, 1), 9);
  const Eigen::MatrixXd sigma = sigma_plugin(f, ray_sets({Lag{1}}, 1.0), 100, 100, 2);
  CHECK(sigma(1, 1) == Approx(1.0).epsilon(0.1));
  CHECK(std::abs(sigma(0, 0)) < 0.1);
  CHECK(std::abs(sigma(0, 1)) < 0.1);
}

TEST_CASE("bias curve") {
  const MmaTheory mma(MmaModel(0.5, 1));
  const auto rows = bias_curve(mma.exponent(), Lag{1}, IntervalSet(1.0), IntervalSet(1.0), 1,
                               {1.0 / 3.0, 0.4}, {1000000, 8000000});
  REQUIRE(rows.size() == 4);
  for (const BiasRow& row : rows) {
    CHECK(row.m == std::lround(std::pow(row.n, row.beta1)));
    CHECK(row.rho_true == Approx(2.0 / 3.0).epsilon(1e-10));
    const double unit = std::sqrt(row.n / std::pow(row.m, 3));
    CHECK(row.predicted / unit == Approx(2.0 / 9.0).epsilon(1e-10));
    CHECK(row.ratio == Approx(1.0).epsilon(0.05));
  }
  const auto iid = bias_curve(independent_exponent(), Lag{1}, IntervalSet(1.0), IntervalSet(1.0),
                              1, {0.4}, {1000000});
  CHECK(iid[0].rho_pre == Approx(1.0 - std::exp(-1.0 / iid[0].m)).epsilon(1e-12));
  CHECK(iid[0].ratio == Approx(1.0).epsilon(0.01));

  std::ostringstream csv;
  write_bias_csv(iid, csv);
  CHECK(csv.str().rfind("h1,n,beta1,m,", 0) == 0);
}
