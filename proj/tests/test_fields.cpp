#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "extremo/error.hpp"
#include "extremo/fields.hpp"
#include "extremo/rng.hpp"
#include "extremo/theory.hpp"

using namespace extremo;

namespace {

double frechet_cdf(double x) { return std::exp(-1.0 / x); }

// One-sample KS distance against the unit Frechet law.
double ks_frechet(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = frechet_cdf(x[i]);
    ks = std::max({ks, (i + 1) / n - f, f - i / n});
  }
  return ks;
}

// Frequency of {X(s1) <= x1, X(s2) <= x2} over independent replicates.
template <class Sim>
double joint_cdf(Sim&& simulate, std::size_t s1, std::size_t s2, double x1, double x2,
                 int reps) {
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    const GridField f = simulate(derive_seed(99, static_cast<std::uint64_t>(r)));
    hits += f.values[static_cast<Eigen::Index>(s1)] <= x1 &&
            f.values[static_cast<Eigen::Index>(s2)] <= x2;
  }
  return hits / static_cast<double>(reps);
}

}  // namespace

TEST_CASE("iid field: margins and determinism") {
  const Grid grid(1000, 2);
  const GridField f = simulate_iid_frechet(grid, 11);
  CHECK(f.values.size() == 1000000);
  CHECK(f.model_tag == "iid");
  CHECK((f.values > 0).all());
  const double median = 1.0 / std::log(2.0);
  const double below = (f.values <= median).cast<double>().mean();
  CHECK(std::abs(below - 0.5) < 3 * std::sqrt(0.25 / 1e6));
  for (double m : {10.0, 30.0}) {
    const double tail = (f.values > m * m).cast<double>().mean() * m * m;
    CHECK(std::abs(tail - 1.0) < 4 * std::sqrt(m * m / 1e6));
  }
  const GridField g = simulate_iid_frechet(grid, 11);
  CHECK((f.values == g.values).all());
  const GridField h = simulate_iid_frechet(Grid(100, 1), 12);
  CHECK(ks_frechet({h.values.begin(), h.values.end()}) < 1.36 / std::sqrt(100.0));
}

TEST_CASE("MMA field: determinism and exact margins") {
  const MmaModel model(0.5, 1);
  const Grid grid(300, 1);
  const GridField a = simulate_mma(model, grid, 5);
  const GridField b = simulate_mma(model, grid, 5);
  CHECK((a.values == b.values).all());
  CHECK((a.values > 0).all());
  CHECK(a.model_tag == model.tag());

  // Well-separated sites from independent replicates.
  std::vector<double> pooled;
  for (int r = 0; r < 2000; ++r) {
    const GridField f = simulate_mma(model, Grid(2, 1), derive_seed(1, r));
    pooled.push_back(f.values[0]);
  }
  CHECK(ks_frechet(pooled) < 1.36 / std::sqrt(2000.0));
  CHECK_THROWS_AS(simulate_mma(MmaModel(0.5, 2), grid, 1), DomainError);
}

TEST_CASE("MMA field: bivariate law at lag 1") {
  const MmaModel model(0.5, 1);
  const int reps = 20000;
  const double p = joint_cdf([&](std::uint64_t s) { return simulate_mma(model, Grid(2, 1), s); },
                             0, 1, 2.0, 2.0, reps);
  const double expected = std::exp(-(4.0 / 3.0) / 2.0);
  CHECK(std::abs(p - expected) < 3 * std::sqrt(expected * (1 - expected) / reps));
}

TEST_CASE("MMA field: tiny phi is the innovation field") {
  const MmaModel model(1e-9, 1);
  const MmaTheory theory(model);
  CHECK(theory.theta(Lag{1}) == Catch::Approx(2.0).epsilon(1e-8));
  const GridField f = simulate_mma(model, Grid(50, 1), 3);
  CHECK((f.values > 0).all());
}

TEST_CASE("MMA field: max-stability") {
  const MmaModel model(0.7, 2);
  std::vector<double> pooled;
  for (int r = 0; r < 1000; ++r) {
    double maximum = 0.0;
    for (int k = 0; k < 4; ++k) {
      const GridField f = simulate_mma(model, Grid(2, 2), derive_seed(r, k));
      maximum = std::max(maximum, f.values[0]);
    }
    pooled.push_back(maximum / 4.0);
  }
  CHECK(ks_frechet(pooled) < 1.36 / std::sqrt(1000.0));
}

TEST_CASE("MMA field: stationarity across sub-blocks") {
  const GridField f = simulate_mma(MmaModel(0.5, 1), Grid(40000, 1), 17);
  const double q = 5.0;
  const auto half = f.values.size() / 2;
  const double left = (f.values.head(half) > q).cast<double>().mean();
  const double right = (f.values.tail(half) > q).cast<double>().mean();
  const double p = 1.0 - frechet_cdf(q);
  // Dependence inflates the variance by at most theta-type factors; 6 SE is generous.
  CHECK(std::abs(left - right) < 6 * std::sqrt(2 * p * (1 - p) / half));
}

TEST_CASE("Brown-Resnick field: complete dependence when delta vanishes") {
  const BrModel model(Variogram(0.0, 1.0), 2);
  const GridField f = simulate_brown_resnick(model, Grid(5, 2), 4);
  CHECK((f.values == f.values[0]).all());
}

TEST_CASE("Brown-Resnick field: margins and bivariate law") {
  const BrModel model(Variogram(1.0, 1.0), 1);
  for (BrStopping stopping : {BrStopping::normalized, BrStopping::quantile}) {
    BrSimulationConfig config;
    config.stopping = stopping;
    auto sim = [&](std::uint64_t s) { return simulate_brown_resnick(model, Grid(2, 1), s, config); };
    const int reps = 20000;
    const double p0 = joint_cdf(sim, 0, 0, 1.0, 1.0, reps);
    CHECK(std::abs(p0 - std::exp(-1.0)) < 3 * std::sqrt(0.25 / reps));
    // P(X(0) > x, X(1) > x) = 1 - 2 e^{-1/x} + e^{-theta/x}.
    const double theta = br_v2(model.variogram, Lag{1}, 1.0, 1.0);
    const double both = joint_cdf(sim, 0, 1, 1.0, 1.0, reps);
    const double expected = std::exp(-theta);
    CHECK(std::abs(both - expected) < 3 * std::sqrt(expected * (1 - expected) / reps));
  }
}

TEST_CASE("Brown-Resnick field: determinism, budget and size limits") {
  const BrModel model(Variogram(1.0, 1.0), 2);
  const GridField a = simulate_brown_resnick(model, Grid(8, 2), 21);
  const GridField b = simulate_brown_resnick(model, Grid(8, 2), 21);
  CHECK((a.values == b.values).all());
  CHECK((a.values > 0).all());

  BrSimulationConfig tight;
  tight.stopping = BrStopping::quantile;
  tight.max_points = 10;
  try {
    simulate_brown_resnick(model, Grid(20, 2), 1, tight);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.points() == 10);
    CHECK(e.last_xi() > e.stop_level());
  }
  CHECK_THROWS_AS(simulate_brown_resnick(BrModel(Variogram(), 2), Grid(70, 2), 1), DomainError);
}

TEST_CASE("binary and CSV serialization") {
  const GridField f = simulate_mma(MmaModel(0.4, 2), Grid(6, 2), 8);
  std::stringstream buffer;
  write_binary(f, buffer, 0xabcdefull);
  std::uint64_t hash = 0;
  const GridField g = read_binary(buffer, &hash);
  CHECK(hash == 0xabcdefull);
  CHECK(g.grid == f.grid);
  CHECK(g.model_tag == f.model_tag);
  CHECK(g.seed == f.seed);
  CHECK((g.values == f.values).all());

  const std::string bytes = [&] {
    std::stringstream s;
    write_binary(f, s);
    return s.str();
  }();
  CHECK(bytes.substr(0, 4) == "XGRF");
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_binary(truncated), Error);
  std::stringstream garbage("NOPE");
  CHECK_THROWS_AS(read_binary(garbage), Error);

  std::ostringstream csv;
  write_csv(f, csv);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') >= 36);
  CHECK(text.find("s1,s2,value\n") != std::string::npos);
}
