#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "extremo/error.hpp"
#include "extremo/estimators.hpp"
#include "extremo/fields.hpp"
#include "extremo/models.hpp"
#include "extremo/theory.hpp"

namespace extremo {

/// Rates m = round(n^beta1), r = round(n^beta2) and the asymptotic
/// conditions they satisfy. Flags depend on (beta1, beta2) only.
struct SequencePlan {
  int n = 0;
  int d = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  int m = 0;
  int r = 0;
  double a_m = 0.0;    ///< m^d
  bool m2_ok = false;  ///< m^2 r^2 / n -> 0, i.e. beta1 + beta2 < 1/2
  bool logm_o_r = false;
  bool logn_o_r = false;
  bool bias_ok = false;     ///< n / m^3 -> 0, i.e. beta1 > 1/3
  bool clt_window = false;  ///< beta1 in (1/3, 1/2), beta2 in (0, min(beta1, 1/2 - beta1))
};

/// Requires 0 < beta2 < beta1 < 1 and 1 <= r < m < n after rounding.
SequencePlan plan(int n, int d, double beta1, double beta2);

/// Plan with explicit m and r; the exponents are recovered as log m / log n
/// and log r / log n.
SequencePlan plan_explicit(int n, int d, int m, int r);

/// One of the three simulated models together with its exponent measure.
class ModelSpec {
 public:
  struct Iid {};
  using Variant = std::variant<Iid, MmaModel, BrModel>;

  static ModelSpec iid() { return ModelSpec(Iid{}); }
  explicit ModelSpec(Variant model, BrSimulationConfig br_config = {});

  GridField simulate(const Grid& grid, std::uint64_t seed) const;
  BivariateExponent exponent() const;
  std::string tag() const;
  /// Dimension fixed by the model, if any.
  std::optional<int> dim() const;
  const Variant& model() const noexcept { return model_; }

 private:
  Variant model_;
  BrSimulationConfig br_config_;
};

enum class Center { preasymptotic, true_value };

std::string to_string(Center center);
Center parse_center(const std::string& text);

/// A replicate failed with something other than a discardable zero denominator.
class ReplicateError : public Error {
 public:
  ReplicateError(std::int64_t index, const std::string& what)
      : Error("replicate " + std::to_string(index) + ": " + what), index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

struct NormalityThresholds {
  double ks_coefficient = 1.36;  ///< KS threshold is ks_coefficient / sqrt(N)
  double qq_correlation = 0.99;
};

struct NormalityDiagnostics {
  std::int64_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ks_distance = 0.0;
  double ks_threshold = 0.0;
  bool ks_pass = false;
  double qq_correlation = 0.0;
  bool qq_pass = false;
  /// Sample variance / reference variance; NaN without a reference.
  double variance_ratio = 0.0;
};

/// KS distance against N(mean, variance) fitted to the samples and the
/// normal QQ correlation with Blom plotting positions. Needs >= 100 samples.
NormalityDiagnostics normality_diagnostics(const std::vector<double>& samples,
                                           std::optional<double> reference_variance = {},
                                           const NormalityThresholds& thresholds = {});

/// mu_hat(D_1), ..., mu_hat(D_p), mu_hat(D_{p+1}) on full balls of radius gamma.
Eigen::VectorXd mu_plugin(const GridField& field, const LagEventSets& sets, int m,
                          double level);

/// Sigma_hat_ij = mu_hat(D_i & D_j) + sum_{0 < ||l|| <= r_trunc} tau_hat(D_i x D_j; l),
/// indices 1..p+1, lags l in the norm of the lag set.
Eigen::MatrixXd sigma_plugin(const GridField& field, const LagEventSets& sets, int m,
                             double level, int r_trunc);

/// Pi = mu(A)^-4 F Sigma F^T with F = [mu(A) I_p, -(mu(D_1), ..., mu(D_p))^T].
Eigen::MatrixXd pi_matrix(const Eigen::MatrixXd& sigma, double mu_a,
                          const Eigen::VectorXd& mu_d);

struct CltConfig {
  LagEventSets sets;
  int reps = 100;
  std::uint64_t master_seed = 0;
  Center center = Center::preasymptotic;
  int jobs = 1;
  /// Also estimate Sigma, mu and Pi by plug-in on every replicate.
  bool plugin = true;
  /// Truncation of the lag sum in Sigma; defaults to the plan's r.
  std::optional<int> r_trunc;
  NormalityThresholds thresholds;
};

struct CltReport {
  SequencePlan plan;
  std::string model_tag;
  Center center = Center::preasymptotic;
  std::vector<Lag> lags;
  IntervalSet a{1.0};
  IntervalSet b{1.0};
  std::uint64_t master_seed = 0;
  int r_trunc = 0;

  std::int64_t requested = 0;
  std::vector<std::int64_t> discarded;  ///< replicate indices
  std::vector<std::int64_t> kept;       ///< replicate indices, ascending

  std::vector<double> rho_center;  ///< per lag
  std::vector<double> rho_true;    ///< per lag
  Eigen::MatrixXd rho_hat;         ///< kept replicates x lags
  Eigen::MatrixXd deviations;      ///< (n/m)^{d/2} (rho_hat - rho_center)
  Eigen::MatrixXd pi_mc;           ///< sample covariance of the deviations

  bool has_plugin = false;
  Eigen::VectorXd mu_hat;  ///< replicate mean of mu_plugin
  Eigen::MatrixXd sigma_hat;
  Eigen::MatrixXd f;
  Eigen::MatrixXd pi_hat;

  std::vector<NormalityDiagnostics> diagnostics;  ///< per lag
};

/// Runs reps independent replicates (seed derive_seed(master_seed, i)) on
/// S_n with the analytic threshold a_m = m^d. Replicates without
/// exceedances are discarded; reductions run in replicate order, so the
/// report does not depend on `jobs`.
CltReport scaled_deviations(const ModelSpec& model, const SequencePlan& plan,
                            const CltConfig& config);

std::string clt_report_to_json(const CltReport& report);
/// Long format: replicate, h1..hd, rho_hat, deviation.
void write_clt_samples_csv(const CltReport& report, std::ostream& out);

struct BiasRow {
  Lag h;
  int n;
  double beta1;
  int m;
  double rho_pre;
  double rho_true;
  double scaled_bias;  ///< (n/m)^{d/2} (rho_pre - rho_true)
  double predicted;    ///< (n/m^3)^{d/2} c / 2, c the first-order Taylor coefficient
  double ratio;        ///< scaled_bias / predicted
};

/// Deterministic drift table over every (beta1, n), m = round(n^beta1).
std::vector<BiasRow> bias_curve(const BivariateExponent& v2, const Lag& h,
                                const IntervalSet& a, const IntervalSet& b, int d,
                                const std::vector<double>& beta1s,
                                const std::vector<int>& ns);

/// Long format: h1..hd, n, beta1, m, rho_pre, rho_true, scaled_bias, predicted, ratio.
void write_bias_csv(const std::vector<BiasRow>& rows, std::ostream& out);

}  // namespace extremo
