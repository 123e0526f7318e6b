#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "extremo/fields.hpp"
#include "extremo/grid.hpp"
#include "extremo/models.hpp"

namespace extremo {

enum class ThresholdMode { analytic, empirical };

/// Threshold level a_m used to scale the field before testing membership.
struct ThresholdSequence {
  ThresholdMode mode;
  int m;
  double value;
};

/// Analytic mode: a_m = m^d (requires a unit Frechet model tag).
/// Empirical mode: the (1 - 1/m^d) sample quantile of the pooled values,
/// taken as the order statistic of rank ceil((1 - 1/m^d) |S_n|).
ThresholdSequence threshold(ThresholdMode mode, const GridField& field, int m);

/// Conjunction of site conditions X(s + offset) / a_m in interval; the
/// event {Y(s) in C} for a set C of the vectorized process.
class BallEvent {
 public:
  struct Term {
    Lag offset;
    IntervalSet set;
  };

  BallEvent() = default;
  explicit BallEvent(std::vector<Term> terms);

  /// The empty set C = {} (never occurs).
  static BallEvent none();
  /// D_{p+1}: X(s) in A.
  static BallEvent exceedance(const IntervalSet& a, int d);
  /// D_i: X(s) in A and X(s + h) in B.
  static BallEvent pair(const IntervalSet& a, const Lag& h, const IntervalSet& b);

  /// Intersection (conjunction of terms).
  friend BallEvent operator&(const BallEvent& lhs, const BallEvent& rhs);

  bool is_empty_set() const noexcept { return empty_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }

  /// Largest ||offset|| over the terms.
  double reach(Norm kind) const;

  bool holds(const GridField& field, std::size_t site, double level) const;

 private:
  std::vector<Term> terms_;
  bool empty_ = false;
};

/// H together with the sets A, B; produces the events D_1..D_p, D_{p+1}.
struct LagEventSets {
  LagSet lags;
  IntervalSet a;
  IntervalSet b;

  BallEvent d_pair(std::size_t i) const { return BallEvent::pair(a, lags[i], b); }
  BallEvent d_exceed() const { return BallEvent::exceedance(a, lags.dim()); }
};

enum class SeriesKind { empirical, preasymptotic, true_value };

std::string to_string(SeriesKind kind);

/// rho(h) for every lag of a LagSet, with provenance.
struct ExtremogramSeries {
  SeriesKind kind = SeriesKind::empirical;
  std::vector<Lag> lags;
  std::vector<double> values;
  int n = 0;
  int m = 0;
  double level = 0.0;  ///< a_m
  IntervalSet a{1.0};
  IntervalSet b{1.0};
  std::uint64_t seed = 0;
  /// Empirical only: numerator pair counts and shared denominator count.
  std::vector<std::int64_t> pair_counts;
  std::int64_t exceedances = 0;
};

/// rho_hat(h) = [|S_n(h)|^-1 sum_{S_n(h)} 1{X(s)/a in A, X(s+h)/a in B}]
///            / [|S_n|^-1 sum_{S_n} 1{X(s)/a in A}], with integer accumulation.
///
/// Throws NoExceedances when the denominator count is zero.
ExtremogramSeries empirical_extremogram(const GridField& field, const LagSet& lags,
                                        const IntervalSet& a, const IntervalSet& b,
                                        double level);

/// Which sites enter a ball-event average.
enum class Support {
  /// Sites whose whole ball B(s, gamma) lies in S_n (boundary dropped).
  full_balls,
  /// Sites where every term offset stays in S_n (S_n(h) for D_i, S_n for D_{p+1}).
  event_offsets,
};

struct EventCount {
  std::int64_t hits = 0;
  std::int64_t sites = 0;
};

/// Number of sites s in the support with {Y(s) / a in C}.
EventCount count_event(const GridField& field, const BallEvent& c, double gamma,
                       double level, Support support = Support::full_balls,
                       Norm kind = Norm::sup);

/// mu_hat(C) = (m/n)^d sum_s 1{Y(s)/a_m in C}, with the sum renormalized to
/// the full grid when the support drops boundary sites: m^d hits / sites.
double mu_hat(const GridField& field, const BallEvent& c, double gamma, int m,
              double level, Support support = Support::full_balls,
              Norm kind = Norm::sup);

/// tau_hat(C x D) at lag h: m^d hits / sites over s with both Y(s) and
/// Y(s + h) supported, hits counting {Y(s)/a in C, Y(s+h)/a in D}.
double tau_hat(const GridField& field, const BallEvent& c, const BallEvent& d,
               const Lag& h, double gamma, int m, double level,
               Support support = Support::full_balls, Norm kind = Norm::sup);

void write_series_csv(const ExtremogramSeries& series, std::ostream& out);
std::string series_to_json(const ExtremogramSeries& series);

}  // namespace extremo
