#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "extremo/detail/mma_kernel.hpp"
#include "extremo/grid.hpp"
#include "extremo/models.hpp"

namespace extremo {

/// Bivariate exponent measure V2(h; x1, x2) = -log P(X(0) <= x1, X(h) <= x2)
/// of a max-stable process with unit Frechet margins.
///
/// Infinite levels follow the margin conventions V2(h; x, inf) = 1/x,
/// V2(h; inf, x) = 1/x and V2(h; inf, inf) = 0; the wrapped callable only
/// ever sees finite positive levels.
class BivariateExponent {
 public:
  using Fn = std::function<double(const Lag&, double, double)>;

  BivariateExponent(Fn fn, std::string tag);

  double operator()(const Lag& h, double x1, double x2) const;

  /// Extremal coefficient theta(h) = V2(h; 1, 1).
  double theta(const Lag& h) const { return (*this)(h, 1.0, 1.0); }

  const std::string& tag() const noexcept { return tag_; }

 private:
  Fn fn_;
  std::string tag_;
};

/// Independent sites (complete dependence at the zero lag).
BivariateExponent independent_exponent();
BivariateExponent complete_dependence_exponent();

/// Husler-Reiss form for Brown-Resnick with Var[W(s)] = 2 delta(s).
double br_v2(const Variogram& variogram, const Lag& h, double x1, double x2);
BivariateExponent br_exponent(const Variogram& variogram);

struct MmaCounts {
  std::int64_t n;  ///< N(j): lattice points with ||s|| = j
  std::int64_t q;  ///< Q_h(j): lattice points with min(||s||, ||s + h||) = j
};

/// Exact lattice counts by enumeration over the ball of radius j + ||h||.
MmaCounts mma_counts(int d, const Lag& h, int j, Norm norm = Norm::sup);

/// Closed forms of the truncated MMA; every lattice sum stops at the
/// model's truncation radius, so these describe the simulated process.
class MmaTheory {
 public:
  explicit MmaTheory(MmaModel model);

  const MmaModel& model() const noexcept { return model_; }

  /// (norm value, count) for every distinct norm value <= R, ascending.
  const std::vector<std::pair<double, std::int64_t>>& shells() const noexcept {
    return shells_;
  }

  /// V1 = sum_j N(j) phi^j.
  double v1() const noexcept { return v1_; }

  /// V2(h) = sum_j Q_h(j) phi^j for the unstandardized process.
  double v2(const Lag& h) const;

  /// theta(h) = V2(h) / V1.
  double theta(const Lag& h) const { return v2(h) / v1_; }

  /// V2(h; x1, x2) of the standardized process,
  /// (1/V1) sum_z max(phi^||z|| / x1, phi^||z + h|| / x2).
  double v2_general(const Lag& h, double x1, double x2) const;

  BivariateExponent exponent() const;

 private:
  MmaModel model_;
  detail::MmaKernel kernel_;
  std::vector<std::pair<double, std::int64_t>> shells_;
  double v1_;
};

double mma_v1(const MmaModel& model);
double mma_v2(const MmaModel& model, const Lag& h);
double mma_theta(const MmaModel& model, const Lag& h);
double mma_v2_general(const MmaModel& model, const Lag& h, double x1, double x2);

/// rho_AB(h) = a1 a2 / (a2 - a1) * (-V(a2,b2) + V(a2,b1) + V(a1,b2) - V(a1,b1)),
/// reducing to a (1/a + 1/b - V(a,b)) for rays.
///
/// Values within 1e-12 outside [0, 1] are clamped; anything further out, or
/// an exponent measure outside max(1/x1,1/x2) <= V <= 1/x1 + 1/x2, throws.
double true_extremogram(const BivariateExponent& v2, const Lag& h,
                        const IntervalSet& a, const IntervalSet& b);

/// P(X(0) in level*A, X(h) in level*B) / P(X(0) in level*A), evaluated with
/// expm1 differences.
double preasymptotic_at_level(const BivariateExponent& v2, const Lag& h,
                              const IntervalSet& a, const IntervalSet& b,
                              double level);

/// Pre-asymptotic extremogram at the analytic threshold a_m = m^d.
double preasymptotic_exact(const BivariateExponent& v2, const Lag& h,
                           const IntervalSet& a, const IntervalSet& b, int m,
                           int d);

/// First-order coefficient c with rho_m = rho + c / (2 m^d) + O(m^{-2d}).
///
/// Rays: c = (rho - 2a/b)(rho - 1) / a. Bounded sets:
/// c = a1 a2/(a2 - a1) * (V(a2,b2)^2 - V(a2,b1)^2 - V(a1,b2)^2 + V(a1,b1)^2
///                        + rho (1/a1^2 - 1/a2^2)).
double taylor_coefficient(double rho, const BivariateExponent& v2, const Lag& h,
                          const IntervalSet& a, const IntervalSet& b);

double preasymptotic_taylor(double rho, const BivariateExponent& v2, const Lag& h,
                            const IntervalSet& a, const IntervalSet& b, int m,
                            int d);

/// Upper incomplete gamma for integer s: (s-1)! e^{-y} sum_{i<s} y^i / i!.
double incomplete_gamma(int s, double y);

/// Proportional alpha-mixing bound k l sum_{r/2 <= j <= R} j^{d-1} phi^j.
double mma_mixing_bound(const MmaModel& model, double k, double l, double r);

struct TheoryRow {
  Lag h;
  double theta;
  double rho_true;
  double rho_pre;
  double taylor;
};

std::vector<TheoryRow> theory_table(const BivariateExponent& v2,
                                    const std::vector<Lag>& lags,
                                    const IntervalSet& a, const IntervalSet& b,
                                    int m, int d);

/// Long-format CSV: h1..hd, theta, rho_true, rho_pre, taylor.
void write_theory_csv(const std::vector<TheoryRow>& rows, std::ostream& out);

}  // namespace extremo
