#include "extremo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "extremo/error.hpp"
#include "extremo/io.hpp"

namespace extremo {

namespace {

bool frechet_margins(const std::string& tag) {
  return tag == "iid" || tag.starts_with("mma(") || tag.starts_with("br(");
}

}  // namespace

ThresholdSequence threshold(ThresholdMode mode, const GridField& field, int m) {
  if (m < 2) throw DomainError("threshold index m must be >= 2");
  const int d = field.grid.d();
  const double md = std::pow(static_cast<double>(m), d);
  if (mode == ThresholdMode::analytic) {
    if (!frechet_margins(field.model_tag))
      throw DomainError("analytic threshold a_m = m^d needs unit Frechet margins, "
                        "model tag is '" + field.model_tag + "'");
    return {mode, m, md};
  }
  const auto sites = static_cast<double>(field.grid.size());
  if (md > sites)
    throw DomainError("empirical threshold: m^d exceeds the number of sites");
  std::vector<double> sorted(field.values.begin(), field.values.end());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - 1.0 / md) * sites));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return {mode, m, sorted[rank - 1]};
}

// ---------------------------------------------------------------------------
// Ball events

BallEvent::BallEvent(std::vector<Term> terms) : terms_(std::move(terms)) {}

BallEvent BallEvent::none() {
  BallEvent e;
  e.empty_ = true;
  return e;
}

BallEvent BallEvent::exceedance(const IntervalSet& a, int d) {
  return BallEvent({Term{Lag(d, 0), a}});
}

BallEvent BallEvent::pair(const IntervalSet& a, const Lag& h, const IntervalSet& b) {
  return BallEvent({Term{Lag(h.size(), 0), a}, Term{h, b}});
}

BallEvent operator&(const BallEvent& lhs, const BallEvent& rhs) {
  if (lhs.empty_ || rhs.empty_) return BallEvent::none();
  std::vector<BallEvent::Term> terms = lhs.terms_;
  terms.insert(terms.end(), rhs.terms_.begin(), rhs.terms_.end());
  return BallEvent(std::move(terms));
}

double BallEvent::reach(Norm kind) const {
  double r = 0.0;
  for (const Term& t : terms_) r = std::max(r, norm(t.offset, kind));
  return r;
}

bool BallEvent::holds(const GridField& field, std::size_t site, double level) const {
  if (empty_) return false;
  for (const Term& t : terms_) {
    const std::int64_t idx = static_cast<std::int64_t>(site) + field.grid.offset(t.offset);
    if (!t.set.contains(field.values[idx] / level)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Counting

namespace {

struct Box {
  std::vector<int> lo, hi;
  std::int64_t size() const {
    std::int64_t count = 1;
    for (std::size_t j = 0; j < lo.size(); ++j)
      count *= std::max(0, hi[j] - lo[j] + 1);
    return count;
  }
};

Box full_ball_box(const Grid& grid, double gamma) {
  const int g = static_cast<int>(std::floor(gamma));
  return Box{std::vector<int>(grid.d(), 1 + g), std::vector<int>(grid.d(), grid.n() - g)};
}

Box offsets_box(const Grid& grid, const std::vector<BallEvent::Term>& terms) {
  Box box{std::vector<int>(grid.d(), 1), std::vector<int>(grid.d(), grid.n())};
  for (const auto& t : terms)
    for (int j = 0; j < grid.d(); ++j) {
      box.lo[j] = std::max(box.lo[j], 1 - t.offset[j]);
      box.hi[j] = std::min(box.hi[j], grid.n() - t.offset[j]);
    }
  return box;
}

Box intersect(Box a, const Box& b) {
  for (std::size_t j = 0; j < a.lo.size(); ++j) {
    a.lo[j] = std::max(a.lo[j], b.lo[j]);
    a.hi[j] = std::min(a.hi[j], b.hi[j]);
  }
  return a;
}

Box shift(Box a, const Lag& h) {
  for (std::size_t j = 0; j < a.lo.size(); ++j) {
    a.lo[j] -= h[j];
    a.hi[j] -= h[j];
  }
  return a;
}

void check_event(const GridField& field, const BallEvent& e, double gamma, Norm kind) {
  if (!(gamma >= 0.0)) throw DomainError("ball radius gamma must be nonnegative");
  for (const auto& t : e.terms())
    if (static_cast<int>(t.offset.size()) != field.grid.d())
      throw DomainError("event offset dimension does not match the grid");
  if (e.reach(kind) > gamma + 1e-12)
    throw DomainError("event reaches outside the ball B(0, gamma)");
}

EventCount count_in_box(const GridField& field, const BallEvent& e, const Box& box,
                        double level) {
  EventCount out;
  out.sites = box.size();
  if (out.sites == 0 || e.is_empty_set()) return out;
  struct Resolved {
    std::int64_t shift;
    IntervalSet set;
  };
  std::vector<Resolved> terms;
  for (const auto& t : e.terms()) terms.push_back({field.grid.offset(t.offset), t.set});
  const double* values = field.values.data();
  for_each_in_box(field.grid, box.lo, box.hi, [&](std::size_t s) {
    for (const auto& t : terms)
      if (!t.set.contains(values[static_cast<std::int64_t>(s) + t.shift] / level))
        return;
    ++out.hits;
  });
  return out;
}

}  // namespace

EventCount count_event(const GridField& field, const BallEvent& c, double gamma,
                       double level, Support support, Norm kind) {
  check_event(field, c, gamma, kind);
  if (!(level > 0.0)) throw DomainError("threshold level must be positive");
  const Box box = support == Support::full_balls ? full_ball_box(field.grid, gamma)
                                                 : offsets_box(field.grid, c.terms());
  return count_in_box(field, c, box, level);
}

double mu_hat(const GridField& field, const BallEvent& c, double gamma, int m,
              double level, Support support, Norm kind) {
  if (m < 1) throw DomainError("m must be positive");
  const EventCount count = count_event(field, c, gamma, level, support, kind);
  if (count.sites == 0) throw DomainError("no site supports the event on this grid");
  return std::pow(static_cast<double>(m), field.grid.d()) *
         static_cast<double>(count.hits) / static_cast<double>(count.sites);
}

double tau_hat(const GridField& field, const BallEvent& c, const BallEvent& d,
               const Lag& h, double gamma, int m, double level, Support support,
               Norm kind) {
  if (m < 1) throw DomainError("m must be positive");
  if (!(level > 0.0)) throw DomainError("threshold level must be positive");
  check_event(field, c, gamma, kind);
  check_event(field, d, gamma, kind);
  if (static_cast<int>(h.size()) != field.grid.d())
    throw DomainError("lag dimension does not match the grid");

  std::vector<BallEvent::Term> shifted;
  for (const auto& t : d.terms()) {
    Lag off = t.offset;
    for (std::size_t j = 0; j < off.size(); ++j) off[j] += h[j];
    shifted.push_back({std::move(off), t.set});
  }
  const BallEvent joint = c & (d.is_empty_set() ? BallEvent::none() : BallEvent(shifted));

  Box box;
  if (support == Support::full_balls) {
    const Box inner = full_ball_box(field.grid, gamma);
    box = intersect(inner, shift(inner, h));
  } else {
    std::vector<BallEvent::Term> all = c.terms();
    all.insert(all.end(), shifted.begin(), shifted.end());
    Box base{std::vector<int>(field.grid.d(), 1), std::vector<int>(field.grid.d(), field.grid.n())};
    box = intersect(offsets_box(field.grid, all), intersect(base, shift(base, h)));
  }
  const EventCount count = count_in_box(field, joint, box, level);
  if (count.sites == 0) throw DomainError("no site supports the lagged event pair");
  return std::pow(static_cast<double>(m), field.grid.d()) *
         static_cast<double>(count.hits) / static_cast<double>(count.sites);
}

// ---------------------------------------------------------------------------
// Empirical extremogram

ExtremogramSeries empirical_extremogram(const GridField& field, const LagSet& lags,
                                        const IntervalSet& a, const IntervalSet& b,
                                        double level) {
  if (!(level > 0.0)) throw DomainError("threshold level must be positive");
  if (lags.dim() != field.grid.d())
    throw DomainError("lag dimension does not match the grid");
  const std::size_t sites = field.grid.size();
  std::vector<unsigned char> in_a(sites), in_b(sites);
  std::int64_t exceed = 0;
  for (std::size_t s = 0; s < sites; ++s) {
    const double x = field.values[static_cast<Eigen::Index>(s)] / level;
    in_a[s] = a.contains(x);
    in_b[s] = b.contains(x);
    exceed += in_a[s];
  }
  if (exceed == 0) throw NoExceedances(exceed);

  ExtremogramSeries out;
  out.kind = SeriesKind::empirical;
  out.n = field.grid.n();
  out.level = level;
  out.a = a;
  out.b = b;
  out.seed = field.seed;
  out.exceedances = exceed;
  const double denominator = static_cast<double>(exceed) / static_cast<double>(sites);
  for (const Lag& h : lags.lags()) {
    const std::size_t support = shifted_index_count(field.grid, h);
    std::int64_t pairs = 0;
    for_each_shifted_pair(field.grid, h, [&](std::size_t s, std::size_t t) {
      pairs += in_a[s] & in_b[t];
    });
    out.lags.push_back(h);
    out.pair_counts.push_back(pairs);
    out.values.push_back(
        (static_cast<double>(pairs) / static_cast<double>(support)) / denominator);
  }
  return out;
}

std::string to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::empirical: return "empirical";
    case SeriesKind::preasymptotic: return "preasymptotic";
    case SeriesKind::true_value: return "true";
  }
  return "unknown";
}

void write_series_csv(const ExtremogramSeries& series, std::ostream& out) {
  const std::size_t d = series.lags.empty() ? 1 : series.lags.front().size();
  for (std::size_t j = 0; j < d; ++j) out << "h" << (j + 1) << ",";
  out << "value,kind,n,m,seed\n";
  for (std::size_t i = 0; i < series.lags.size(); ++i) {
    for (int c : series.lags[i]) out << c << ",";
    out << io::format_double(series.values[i]) << "," << to_string(series.kind) << ","
        << series.n << "," << series.m << "," << series.seed << "\n";
  }
}

std::string series_to_json(const ExtremogramSeries& series) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(series.kind);
  j["n"] = series.n;
  j["m"] = series.m;
  j["a_m"] = series.level;
  j["A"] = series.a.to_string();
  j["B"] = series.b.to_string();
  j["seed"] = series.seed;
  if (series.kind == SeriesKind::empirical) j["exceedances"] = series.exceedances;
  auto& rows = j["lags"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < series.lags.size(); ++i) {
    nlohmann::ordered_json row;
    row["h"] = series.lags[i];
    row["value"] = series.values[i];
    if (i < series.pair_counts.size()) row["pairs"] = series.pair_counts[i];
    rows.push_back(std::move(row));
  }
  return j.dump(2);
}

}  // namespace extremo
