#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace extremo {

enum class Norm { sup, euclidean };

std::string to_string(Norm norm);
Norm parse_norm(const std::string& text);

/// Integer lattice vector; used both for lags and for lattice points.
using Lag = std::vector<int>;

double norm(std::span<const int> v, Norm kind);

/// The observation grid S_n = {1, ..., n}^d.
///
/// Sites are numbered lexicographically with the first coordinate most
/// significant; coordinates are 1-based as in S_n.
class Grid {
 public:
  Grid(int n, int d);

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  std::size_t size() const noexcept { return size_; }

  /// Flat index of a 1-based lattice point; the point must lie in the grid.
  std::size_t index(std::span<const int> point) const;
  Lag point(std::size_t index) const;
  bool contains(std::span<const int> point) const noexcept;

  /// Flat-index stride of coordinate j (the last coordinate has stride 1).
  std::int64_t stride(int j) const noexcept { return strides_[j]; }

  /// Flat-index displacement of a lag, valid for sites s with s + h in the grid.
  std::int64_t offset(std::span<const int> h) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.d_ == b.d_;
  }

 private:
  int n_;
  int d_;
  std::size_t size_;
  std::vector<std::int64_t> strides_;
};

/// {s' in Z^d : ||s' - center|| <= gamma}, lexicographically ordered.
std::vector<Lag> ball(const Lag& center, double gamma, Norm kind = Norm::sup);

/// S_n(h) = {s in S_n : s + h in S_n}, lexicographically ordered.
/// Throws LagTooLarge if |h_j| >= n for some j.
std::vector<Lag> shifted_index_set(const Grid& grid, const Lag& h);

/// |S_n(h)| = prod_j (n - |h_j|).
std::size_t shifted_index_count(const Grid& grid, const Lag& h);

/// Visits every s in S_n(h) in lexicographic order as f(flat(s), flat(s + h)).
template <class F>
void for_each_shifted_pair(const Grid& grid, const Lag& h, F&& f);

/// Visits flat indices of sites s whose coordinates satisfy
/// lo_j <= s_j <= hi_j (1-based, clipped to the grid), lexicographically.
template <class F>
void for_each_in_box(const Grid& grid, std::span<const int> lo,
                     std::span<const int> hi, F&& f);

/// Finite set H of distinct nonzero lags inside the ball B(0, gamma).
class LagSet {
 public:
  /// Validates: p >= 1, no duplicates, no zero lag, ||h|| <= gamma.
  LagSet(std::vector<Lag> lags, double gamma, Norm kind = Norm::sup);

  /// Every nonzero lag in B(0, gamma), lexicographically.
  static LagSet all_within(double gamma, int d, Norm kind = Norm::sup);

  const std::vector<Lag>& lags() const noexcept { return lags_; }
  const Lag& operator[](std::size_t i) const { return lags_[i]; }
  std::size_t size() const noexcept { return lags_.size(); }
  double gamma() const noexcept { return gamma_; }
  Norm norm_kind() const noexcept { return norm_; }
  int dim() const noexcept { return static_cast<int>(lags_.front().size()); }

 private:
  std::vector<Lag> lags_;
  double gamma_;
  Norm norm_;
};

std::string format_lag(const Lag& h);

// ---------------------------------------------------------------------------

template <class F>
void for_each_in_box(const Grid& grid, std::span<const int> lo,
                     std::span<const int> hi, F&& f) {
  const int d = grid.d();
  std::vector<int> first(d), last(d), cur(d);
  for (int j = 0; j < d; ++j) {
    first[j] = lo[j] < 1 ? 1 : lo[j];
    last[j] = hi[j] > grid.n() ? grid.n() : hi[j];
    if (first[j] > last[j]) return;
  }
  cur = first;
  std::int64_t flat = 0;
  for (int j = 0; j < d; ++j) flat += (cur[j] - 1) * grid.stride(j);
  while (true) {
    f(static_cast<std::size_t>(flat));
    int j = d - 1;
    while (j >= 0 && cur[j] == last[j]) {
      flat -= (cur[j] - first[j]) * grid.stride(j);
      cur[j] = first[j];
      --j;
    }
    if (j < 0) return;
    ++cur[j];
    flat += grid.stride(j);
  }
}

template <class F>
void for_each_shifted_pair(const Grid& grid, const Lag& h, F&& f) {
  const int d = grid.d();
  std::vector<int> lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = h[j] < 0 ? 1 - h[j] : 1;
    hi[j] = h[j] > 0 ? grid.n() - h[j] : grid.n();
  }
  const std::int64_t shift = grid.offset(h);
  for_each_in_box(grid, lo, hi, [&](std::size_t s) {
    f(s, static_cast<std::size_t>(static_cast<std::int64_t>(s) + shift));
  });
}

}  // namespace extremo
