#include "extremo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "extremo/error.hpp"

namespace extremo {

std::string to_string(Norm norm) {
  return norm == Norm::sup ? "sup" : "euclidean";
}

Norm parse_norm(const std::string& text) {
  if (text == "sup" || text == "max" || text == "inf") return Norm::sup;
  if (text == "euclidean" || text == "euclid" || text == "l2")
    return Norm::euclidean;
  throw DomainError("unknown norm '" + text + "' (expected sup or euclidean)");
}

double norm(std::span<const int> v, Norm kind) {
  if (kind == Norm::sup) {
    int m = 0;
    for (int c : v) m = std::max(m, std::abs(c));
    return m;
  }
  std::int64_t sq = 0;
  for (int c : v) sq += std::int64_t{c} * c;
  return std::sqrt(static_cast<double>(sq));
}

Grid::Grid(int n, int d) : n_(n), d_(d) {
  if (n < 2) throw DomainError("grid side length n must be >= 2");
  if (d < 1) throw DomainError("grid dimension d must be >= 1");
  strides_.assign(d, 1);
  double total = 1.0;
  for (int j = d - 2; j >= 0; --j) strides_[j] = strides_[j + 1] * n;
  for (int j = 0; j < d; ++j) total *= n;
  if (total > 4.0e9) throw DomainError("grid has too many sites");
  size_ = static_cast<std::size_t>(strides_[0] * n);
}

bool Grid::contains(std::span<const int> point) const noexcept {
  if (static_cast<int>(point.size()) != d_) return false;
  return std::all_of(point.begin(), point.end(),
                     [this](int c) { return c >= 1 && c <= n_; });
}

std::size_t Grid::index(std::span<const int> point) const {
  if (!contains(point)) throw DomainError("lattice point outside the grid");
  std::int64_t flat = 0;
  for (int j = 0; j < d_; ++j) flat += (point[j] - 1) * strides_[j];
  return static_cast<std::size_t>(flat);
}

Lag Grid::point(std::size_t index) const {
  Lag p(d_);
  auto rest = static_cast<std::int64_t>(index);
  for (int j = 0; j < d_; ++j) {
    p[j] = static_cast<int>(rest / strides_[j]) + 1;
    rest %= strides_[j];
  }
  return p;
}

std::int64_t Grid::offset(std::span<const int> h) const {
  if (static_cast<int>(h.size()) != d_)
    throw DomainError("lag dimension does not match the grid");
  std::int64_t flat = 0;
  for (int j = 0; j < d_; ++j) flat += h[j] * strides_[j];
  return flat;
}

std::vector<Lag> ball(const Lag& center, double gamma, Norm kind) {
  if (!(gamma >= 0.0)) throw DomainError("ball radius must be nonnegative");
  const int d = static_cast<int>(center.size());
  if (d < 1) throw DomainError("ball center must have dimension >= 1");
  const int reach = static_cast<int>(std::floor(gamma));
  std::vector<Lag> out;
  Lag z(d, -reach);
  while (true) {
    if (norm(z, kind) <= gamma) {
      Lag s(d);
      for (int j = 0; j < d; ++j) s[j] = center[j] + z[j];
      out.push_back(std::move(s));
    }
    int j = d - 1;
    while (j >= 0 && z[j] == reach) z[j--] = -reach;
    if (j < 0) break;
    ++z[j];
  }
  return out;
}

namespace {

void check_lag_fits(const Grid& grid, const Lag& h) {
  if (static_cast<int>(h.size()) != grid.d())
    throw DomainError("lag dimension does not match the grid");
  for (int c : h)
    if (std::abs(c) >= grid.n())
      throw LagTooLarge("lag " + format_lag(h) + " does not fit in a grid of side " +
                        std::to_string(grid.n()));
}

}  // namespace

std::size_t shifted_index_count(const Grid& grid, const Lag& h) {
  check_lag_fits(grid, h);
  std::size_t count = 1;
  for (int c : h) count *= static_cast<std::size_t>(grid.n() - std::abs(c));
  return count;
}

std::vector<Lag> shifted_index_set(const Grid& grid, const Lag& h) {
  check_lag_fits(grid, h);
  std::vector<Lag> out;
  out.reserve(shifted_index_count(grid, h));
  for_each_shifted_pair(grid, h, [&](std::size_t s, std::size_t) {
    out.push_back(grid.point(s));
  });
  return out;
}

LagSet::LagSet(std::vector<Lag> lags, double gamma, Norm kind)
    : lags_(std::move(lags)), gamma_(gamma), norm_(kind) {
  if (lags_.empty()) throw DomainError("lag set must contain at least one lag");
  if (!(gamma_ >= 0.0)) throw DomainError("lag set radius must be nonnegative");
  const std::size_t d = lags_.front().size();
  std::set<Lag> seen;
  for (const Lag& h : lags_) {
    if (h.size() != d || d == 0)
      throw DomainError("lags must share a positive dimension");
    if (std::all_of(h.begin(), h.end(), [](int c) { return c == 0; }))
      throw DomainError("the zero lag is not allowed in a lag set");
    if (norm(h, norm_) > gamma_)
      throw DomainError("lag " + format_lag(h) + " lies outside B(0, gamma)");
    if (!seen.insert(h).second)
      throw DomainError("duplicate lag " + format_lag(h));
  }
}

LagSet LagSet::all_within(double gamma, int d, Norm kind) {
  std::vector<Lag> lags;
  for (Lag& h : ball(Lag(d, 0), gamma, kind))
    if (std::any_of(h.begin(), h.end(), [](int c) { return c != 0; }))
      lags.push_back(std::move(h));
  return LagSet(std::move(lags), gamma, kind);
}

std::string format_lag(const Lag& h) {
  std::string s = "(";
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(h[j]);
  }
  return s + ")";
}

}  // namespace extremo
