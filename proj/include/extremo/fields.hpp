#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "extremo/grid.hpp"
#include "extremo/models.hpp"

namespace extremo {

/// Realized field values X(s), s in S_n, stored lexicographically.
struct GridField {
  Grid grid;
  Eigen::ArrayXd values;
  std::string model_tag;
  std::uint64_t seed = 0;

  double operator()(std::span<const int> point) const {
    return values[static_cast<Eigen::Index>(grid.index(point))];
  }
};

/// Spectral functions and stopping rule of the Brown-Resnick construction.
enum class BrStopping {
  /// Each spectral function is re-anchored at a uniformly drawn site and
  /// divided by its grid mean, so it never exceeds |S_n|; generation stops
  /// once xi |S_n| is below the running minimum. Exact on the grid.
  normalized,
  /// Spectral functions exp(W(s) - delta(s)) anchored at the origin site; a
  /// Poisson point xi is ignored at site s once xi exp(c(s)) cannot exceed
  /// the running maximum there, where c(s) is the (1 - tail_prob) quantile
  /// of the size-biased law N(delta(s), 2 delta(s)) of W(s) - delta(s).
  quantile,
};

/// Controls of the threshold-stopped Brown-Resnick construction.
struct BrSimulationConfig {
  BrStopping stopping = BrStopping::normalized;
  double tail_prob = 1e-4;  ///< quantile stopping only
  std::int64_t max_points = 20'000'000;
};

/// I.i.d. standard unit Frechet values.
GridField simulate_iid_frechet(const Grid& grid, std::uint64_t seed);

/// Exact simulation of the truncated MMA, standardized by the truncated V1.
///
/// Innovations Z on the enlarged box [1 - R, n + R]^d are generated as
/// descending order statistics at uniformly permuted positions; generation
/// stops once the next innovation cannot raise any site.
GridField simulate_mma(const MmaModel& model, const Grid& grid, std::uint64_t seed);

/// Largest grid the Brown-Resnick simulator factorizes densely.
inline constexpr std::size_t kMaxBrSites = 4096;

/// Threshold-stopped spectral construction of a stationary Brown-Resnick
/// field. W is drawn with W(o) = 0 at the grid site o nearest the grid
/// centre, from one factorization of its covariance.
///
/// Throws FactorizationError if the covariance cannot be factorized even
/// after a 1e-10 diagonal jitter, and BudgetExceeded when the point budget
/// is spent before the stopping rule fires.
GridField simulate_brown_resnick(const BrModel& model, const Grid& grid,
                                 std::uint64_t seed,
                                 const BrSimulationConfig& config = {});

/// Flat little-endian binary: magic "XGRF", u32 version, u32 d, u32 n,
/// u32 tag length, tag bytes, u64 seed, u64 config hash, n^d float64 values.
void write_binary(const GridField& field, std::ostream& out,
                  std::uint64_t config_hash = 0);
GridField read_binary(std::istream& in, std::uint64_t* config_hash = nullptr);

/// Debug CSV: one row per site with 1-based coordinates and the value.
void write_csv(const GridField& field, std::ostream& out);

}  // namespace extremo
