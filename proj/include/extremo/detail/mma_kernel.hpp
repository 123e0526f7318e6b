#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <vector>

#include "extremo/models.hpp"

namespace extremo::detail {

/// Tabulated MMA weights phi^||z|| keyed by max|z_j| (sup norm) or
/// sum z_j^2 (Euclidean), zero beyond the truncation radius.
class MmaKernel {
 public:
  explicit MmaKernel(const MmaModel& model) : norm_(model.norm) {
    const std::int64_t r = model.trunc_radius;
    max_key_ = norm_ == Norm::sup ? r : r * r;
    table_.resize(static_cast<std::size_t>(max_key_) + 1);
    for (std::int64_t k = 0; k <= max_key_; ++k) {
      const double z_norm = norm_ == Norm::sup
                                ? static_cast<double>(k)
                                : std::sqrt(static_cast<double>(k));
      table_[static_cast<std::size_t>(k)] = model.weight(z_norm);
    }
  }

  std::int64_t key(std::span<const int> z) const noexcept {
    std::int64_t k = 0;
    if (norm_ == Norm::sup) {
      for (int c : z) k = std::max<std::int64_t>(k, std::abs(c));
    } else {
      for (int c : z) k += std::int64_t{c} * c;
    }
    return k;
  }

  double weight_by_key(std::int64_t k) const noexcept {
    return k > max_key_ ? 0.0 : table_[static_cast<std::size_t>(k)];
  }

  double weight(std::span<const int> z) const noexcept {
    return weight_by_key(key(z));
  }

 private:
  Norm norm_;
  std::int64_t max_key_;
  std::vector<double> table_;
};

}  // namespace extremo::detail
