#include "extremo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>

#include "extremo/detail/normal.hpp"
#include "extremo/error.hpp"
#include "extremo/io.hpp"

namespace extremo {

namespace {

bool is_zero(const Lag& h) {
  return std::all_of(h.begin(), h.end(), [](int c) { return c == 0; });
}

void check_level(double x) {
  if (!(x > 0.0)) throw DomainError("exponent measure levels must be positive");
}

}  // namespace

BivariateExponent::BivariateExponent(Fn fn, std::string tag)
    : fn_(std::move(fn)), tag_(std::move(tag)) {}

double BivariateExponent::operator()(const Lag& h, double x1, double x2) const {
  check_level(x1);
  check_level(x2);
  if (x1 == kInf && x2 == kInf) return 0.0;
  if (x2 == kInf) return 1.0 / x1;
  if (x1 == kInf) return 1.0 / x2;
  return fn_(h, x1, x2);
}

BivariateExponent independent_exponent() {
  return BivariateExponent(
      [](const Lag& h, double x1, double x2) {
        if (is_zero(h)) return std::max(1.0 / x1, 1.0 / x2);
        return 1.0 / x1 + 1.0 / x2;
      },
      "iid");
}

BivariateExponent complete_dependence_exponent() {
  return BivariateExponent(
      [](const Lag&, double x1, double x2) { return std::max(1.0 / x1, 1.0 / x2); },
      "complete");
}

double br_v2(const Variogram& variogram, const Lag& h, double x1, double x2) {
  check_level(x1);
  check_level(x2);
  if (x1 == kInf && x2 == kInf) return 0.0;
  if (x2 == kInf) return 1.0 / x1;
  if (x1 == kInf) return 1.0 / x2;
  const double delta = variogram(h);
  if (delta == 0.0) return std::max(1.0 / x1, 1.0 / x2);
  if (delta == kInf) return 1.0 / x1 + 1.0 / x2;
  const double a = std::sqrt(2.0 * delta);
  const double log_ratio = std::log(x2 / x1);
  return detail::normal_cdf(0.5 * a + log_ratio / a) / x1 +
         detail::normal_cdf(0.5 * a - log_ratio / a) / x2;
}

BivariateExponent br_exponent(const Variogram& variogram) {
  return BivariateExponent(
      [variogram](const Lag& h, double x1, double x2) {
        return br_v2(variogram, h, x1, x2);
      },
      "br(" + variogram.tag() + ")");
}

// ---------------------------------------------------------------------------
// MMA

MmaCounts mma_counts(int d, const Lag& h, int j, Norm kind) {
  if (j < 0) throw DomainError("shell index j must be nonnegative");
  if (static_cast<int>(h.size()) != d)
    throw DomainError("lag dimension does not match d");
  // Exact shell membership is decided on integer keys to avoid rounding.
  auto key = [kind](std::span<const int> v) {
    std::int64_t k = 0;
    for (int c : v)
      k = kind == Norm::sup ? std::max<std::int64_t>(k, std::abs(c))
                            : k + std::int64_t{c} * c;
    return k;
  };
  const std::int64_t target = kind == Norm::sup ? j : std::int64_t{j} * j;
  const double reach = j + norm(h, kind);

  MmaCounts counts{0, 0};
  Lag shifted(d);
  for (const Lag& s : ball(Lag(d, 0), reach, Norm::sup)) {
    for (int i = 0; i < d; ++i) shifted[i] = s[i] + h[i];
    const std::int64_t ks = key(s);
    if (ks == target) ++counts.n;
    if (std::min(ks, key(shifted)) == target) ++counts.q;
  }
  return counts;
}

MmaTheory::MmaTheory(MmaModel model) : model_(model), kernel_(model_), v1_(0.0) {
  const int r = model_.trunc_radius;
  const int d = model_.d;
  if (model_.norm == Norm::sup) {
    for (int j = 0; j <= r; ++j) {
      const std::int64_t count =
          j == 0 ? 1
                 : static_cast<std::int64_t>(std::llround(
                       std::pow(2.0 * j + 1.0, d) - std::pow(2.0 * j - 1.0, d)));
      shells_.emplace_back(static_cast<double>(j), count);
    }
  } else {
    std::map<std::int64_t, std::int64_t> by_square;
    for (const Lag& z : ball(Lag(d, 0), r, Norm::euclidean))
      ++by_square[kernel_.key(z)];
    for (const auto& [sq, count] : by_square)
      shells_.emplace_back(std::sqrt(static_cast<double>(sq)), count);
  }
  for (const auto& [z_norm, count] : shells_)
    v1_ += static_cast<double>(count) * model_.weight(z_norm);
}

double MmaTheory::v2(const Lag& h) const {
  const int d = model_.d;
  if (static_cast<int>(h.size()) != d)
    throw DomainError("lag dimension does not match the model");
  // Q_h^{(R)}(shell) by enumeration over B(0,R) union B(-h,R), bucketed by key.
  std::map<std::int64_t, std::int64_t> q;
  Lag lo(d), hi(d), s(d), shifted(d);
  const int r = model_.trunc_radius;
  for (int i = 0; i < d; ++i) {
    lo[i] = std::min(-r, -h[i] - r);
    hi[i] = std::max(r, -h[i] + r);
  }
  s = lo;
  while (true) {
    for (int i = 0; i < d; ++i) shifted[i] = s[i] + h[i];
    const std::int64_t k = std::min(kernel_.key(s), kernel_.key(shifted));
    if (kernel_.weight_by_key(k) > 0.0) ++q[k];
    int i = d - 1;
    while (i >= 0 && s[i] == hi[i]) {
      s[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++s[i];
  }
  double v2 = 0.0;
  for (const auto& [k, count] : q)
    v2 += static_cast<double>(count) * kernel_.weight_by_key(k);
  return v2;
}

double MmaTheory::v2_general(const Lag& h, double x1, double x2) const {
  check_level(x1);
  check_level(x2);
  const int d = model_.d;
  if (static_cast<int>(h.size()) != d)
    throw DomainError("lag dimension does not match the model");
  const double inv1 = x1 == kInf ? 0.0 : 1.0 / x1;
  const double inv2 = x2 == kInf ? 0.0 : 1.0 / x2;
  const int r = model_.trunc_radius;
  Lag lo(d), hi(d), z(d), shifted(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = std::min(-r, -h[i] - r);
    hi[i] = std::max(r, -h[i] + r);
  }
  z = lo;
  double sum = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i) shifted[i] = z[i] + h[i];
    sum += std::max(kernel_.weight(z) * inv1, kernel_.weight(shifted) * inv2);
    int i = d - 1;
    while (i >= 0 && z[i] == hi[i]) {
      z[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++z[i];
  }
  return sum / v1_;
}

BivariateExponent MmaTheory::exponent() const {
  auto self = std::make_shared<const MmaTheory>(*this);
  return BivariateExponent(
      [self](const Lag& h, double x1, double x2) {
        return self->v2_general(h, x1, x2);
      },
      model_.tag());
}

double mma_v1(const MmaModel& model) { return MmaTheory(model).v1(); }

double mma_v2(const MmaModel& model, const Lag& h) { return MmaTheory(model).v2(h); }

double mma_theta(const MmaModel& model, const Lag& h) {
  return MmaTheory(model).theta(h);
}

double mma_v2_general(const MmaModel& model, const Lag& h, double x1, double x2) {
  return MmaTheory(model).v2_general(h, x1, x2);
}

// ---------------------------------------------------------------------------
// Extremograms

namespace {

constexpr double kRangeTolerance = 1e-12;

double checked_v2(const BivariateExponent& v2, const Lag& h, double x1, double x2) {
  const double value = v2(h, x1, x2);
  const double inv1 = x1 == kInf ? 0.0 : 1.0 / x1;
  const double inv2 = x2 == kInf ? 0.0 : 1.0 / x2;
  const double lower = std::max(inv1, inv2);
  const double upper = inv1 + inv2;
  const double slack = kRangeTolerance * upper;
  if (!(value >= lower - slack && value <= upper + slack))
    throw DomainError("exponent measure " + io::format_double(value) +
                      " violates max(1/x1,1/x2) <= V <= 1/x1 + 1/x2 at (" +
                      io::format_double(x1) + ", " + io::format_double(x2) + ")");
  return value;
}

double clamp_unit(double rho) {
  if (!(rho >= -kRangeTolerance && rho <= 1.0 + kRangeTolerance))
    throw DomainError("extremogram value " + io::format_double(rho) +
                      " outside [0, 1]");
  return std::clamp(rho, 0.0, 1.0);
}

// a1 a2 / (a2 - a1), tending to a1 for a ray.
double interval_factor(const IntervalSet& a) {
  if (a.is_ray()) return a.lower;
  return a.lower * a.upper / (a.upper - a.lower);
}

}  // namespace

double true_extremogram(const BivariateExponent& v2, const Lag& h,
                        const IntervalSet& a, const IntervalSet& b) {
  const double a1 = a.lower, a2 = a.upper, b1 = b.lower, b2 = b.upper;
  if (a.is_ray() && b.is_ray()) {
    const double v = checked_v2(v2, h, a1, b1);
    return clamp_unit(a1 * (1.0 / a1 + 1.0 / b1 - v));
  }
  const double combo = -checked_v2(v2, h, a2, b2) + checked_v2(v2, h, a2, b1) +
                       checked_v2(v2, h, a1, b2) - checked_v2(v2, h, a1, b1);
  return clamp_unit(interval_factor(a) * combo);
}

double preasymptotic_at_level(const BivariateExponent& v2, const Lag& h,
                              const IntervalSet& a, const IntervalSet& b,
                              double level) {
  if (!(level > 0.0)) throw DomainError("threshold level must be positive");
  auto e = [&](double x, double y) { return std::expm1(-v2(h, x, y) / level); };
  const double a1 = a.lower, a2 = a.upper, b1 = b.lower, b2 = b.upper;
  const double num = e(a2, b2) - e(a2, b1) - e(a1, b2) + e(a1, b1);
  const double den = std::expm1(-1.0 / (a2 * level)) - std::expm1(-1.0 / (a1 * level));
  return num / den;
}

double preasymptotic_exact(const BivariateExponent& v2, const Lag& h,
                           const IntervalSet& a, const IntervalSet& b, int m,
                           int d) {
  if (m <= 0) throw DomainError("m must be positive");
  return preasymptotic_at_level(v2, h, a, b, std::pow(static_cast<double>(m), d));
}

double taylor_coefficient(double rho, const BivariateExponent& v2, const Lag& h,
                          const IntervalSet& a, const IntervalSet& b) {
  if (a.is_ray() && b.is_ray()) {
    const double av = a.lower, bv = b.lower;
    return (rho - 2.0 * av / bv) * (rho - 1.0) / av;
  }
  const double a1 = a.lower, a2 = a.upper, b1 = b.lower, b2 = b.upper;
  auto sq = [&](double x, double y) {
    const double v = v2(h, x, y);
    return v * v;
  };
  const double inv_a2 = a.is_ray() ? 0.0 : 1.0 / a2;
  const double bracket = sq(a2, b2) - sq(a2, b1) - sq(a1, b2) + sq(a1, b1) +
                         rho * (1.0 / (a1 * a1) - inv_a2 * inv_a2);
  return interval_factor(a) * bracket;
}

double preasymptotic_taylor(double rho, const BivariateExponent& v2, const Lag& h,
                            const IntervalSet& a, const IntervalSet& b, int m,
                            int d) {
  if (m <= 0) throw DomainError("m must be positive");
  const double level = std::pow(static_cast<double>(m), d);
  return rho + taylor_coefficient(rho, v2, h, a, b) / (2.0 * level);
}

double incomplete_gamma(int s, double y) {
  if (s < 1) throw DomainError("incomplete_gamma requires integer s >= 1");
  if (!(y >= 0.0)) throw DomainError("incomplete_gamma requires y >= 0");
  double term = 1.0, sum = 1.0, factorial = 1.0;
  for (int i = 1; i < s; ++i) {
    term *= y / i;
    sum += term;
    factorial *= i;
  }
  return factorial * std::exp(-y) * sum;
}

double mma_mixing_bound(const MmaModel& model, double k, double l, double r) {
  if (!(r >= 0.0)) throw DomainError("mixing distance r must be nonnegative");
  const int first = static_cast<int>(std::ceil(r / 2.0));
  double sum = 0.0;
  for (int j = first; j <= model.trunc_radius; ++j)
    sum += std::pow(static_cast<double>(j), model.d - 1) * std::pow(model.phi, j);
  return k * l * sum;
}

std::vector<TheoryRow> theory_table(const BivariateExponent& v2,
                                    const std::vector<Lag>& lags,
                                    const IntervalSet& a, const IntervalSet& b,
                                    int m, int d) {
  std::vector<TheoryRow> rows;
  rows.reserve(lags.size());
  for (const Lag& h : lags) {
    TheoryRow row{h, v2.theta(h), 0, 0, 0};
    row.rho_true = true_extremogram(v2, h, a, b);
    row.rho_pre = preasymptotic_exact(v2, h, a, b, m, d);
    row.taylor = preasymptotic_taylor(row.rho_true, v2, h, a, b, m, d);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_theory_csv(const std::vector<TheoryRow>& rows, std::ostream& out) {
  const std::size_t d = rows.empty() ? 1 : rows.front().h.size();
  for (std::size_t j = 0; j < d; ++j) out << "h" << (j + 1) << ",";
  out << "theta,rho_true,rho_pre,taylor\n";
  for (const TheoryRow& row : rows) {
    for (int c : row.h) out << c << ",";
    out << io::format_double(row.theta) << "," << io::format_double(row.rho_true)
        << "," << io::format_double(row.rho_pre) << ","
        << io::format_double(row.taylor) << "\n";
  }
}

}  // namespace extremo
