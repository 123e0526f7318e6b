#pragma once

#include <limits>
#include <optional>
#include <string>

#include "extremo/grid.hpp"

namespace extremo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval (lower, upper) with 0 < lower < upper <= inf; a ray when upper is inf.
struct IntervalSet {
  double lower;
  double upper = kInf;

  IntervalSet(double lower, double upper = kInf);

  bool is_ray() const noexcept { return upper == kInf; }
  bool contains(double x) const noexcept { return x > lower && x < upper; }

  /// Limit tail measure mu(A) = 1/lower - 1/upper for unit Frechet margins.
  double tail_measure() const noexcept { return 1.0 / lower - 1.0 / upper; }

  std::string to_string() const;
};

/// Truncated max-moving average: X(s) = max_{||z|| <= R} phi^||z|| Z(s - z) / V1.
struct MmaModel {
  double phi;
  int d;
  int trunc_radius;
  Norm norm = Norm::sup;

  /// Uses default_truncation_radius(phi) when `radius` is empty.
  MmaModel(double phi, int d, std::optional<int> radius = std::nullopt,
           Norm norm = Norm::sup);

  /// Smallest R >= 1 with phi^R < 1e-12.
  static int default_truncation_radius(double phi);

  /// Kernel weight phi^||z|| for ||z|| <= R, zero outside the truncation ball.
  double weight(double z_norm) const noexcept;

  std::string tag() const;
};

/// Power variogram delta(h) = theta * ||h||_2^alpha.
struct Variogram {
  double theta = 1.0;
  double alpha = 1.0;

  Variogram(double theta = 1.0, double alpha = 1.0);

  double operator()(const Lag& h) const;
  double at_distance(double r) const noexcept;

  std::string tag() const;
};

struct BrModel {
  Variogram variogram;
  int d;

  BrModel(Variogram variogram, int d);

  std::string tag() const;
};

}  // namespace extremo
