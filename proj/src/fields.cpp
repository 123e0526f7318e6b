#include "extremo/fields.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "extremo/detail/mma_kernel.hpp"
#include "extremo/detail/normal.hpp"
#include "extremo/error.hpp"
#include "extremo/io.hpp"
#include "extremo/rng.hpp"

namespace extremo {

namespace {

/// Uniform random order of {0, ..., size - 1}, materialized lazily
/// (sparse Fisher-Yates).
class LazyPermutation {
 public:
  explicit LazyPermutation(std::uint64_t size) : size_(size) {}

  std::uint64_t next(Philox4x32& eng) {
    const std::uint64_t j = drawn_ + uniform_index(eng, size_ - drawn_);
    const std::uint64_t picked = at(j);
    if (j != drawn_) moved_[j] = at(drawn_);
    moved_.erase(drawn_);
    ++drawn_;
    return picked;
  }

 private:
  std::uint64_t at(std::uint64_t i) const {
    const auto it = moved_.find(i);
    return it == moved_.end() ? i : it->second;
  }

  std::uint64_t size_;
  std::uint64_t drawn_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> moved_;
};

double truncated_v1(const MmaModel& model, const detail::MmaKernel& kernel) {
  double v1 = 0.0;
  for (const Lag& z : ball(Lag(model.d, 0), model.trunc_radius, model.norm))
    v1 += kernel.weight(z);
  return v1;
}

}  // namespace

GridField simulate_iid_frechet(const Grid& grid, std::uint64_t seed) {
  Philox4x32 eng(seed);
  Eigen::ArrayXd values(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = unit_frechet(eng);
  return GridField{grid, std::move(values), "iid", seed};
}

GridField simulate_mma(const MmaModel& model, const Grid& grid, std::uint64_t seed) {
  if (model.d != grid.d())
    throw DomainError("MMA model dimension does not match the grid");
  const int d = grid.d();
  const int n = grid.n();
  const int radius = model.trunc_radius;
  const detail::MmaKernel kernel(model);

  const std::int64_t side = std::int64_t{n} + 2 * std::int64_t{radius};
  double box_size = 1.0;
  for (int j = 0; j < d; ++j) box_size *= static_cast<double>(side);
  if (box_size > 9.0e15) throw DomainError("MMA innovation box is too large");
  const auto innovations = static_cast<std::uint64_t>(box_size);

  const std::size_t sites = grid.size();
  Eigen::ArrayXd current = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(sites));
  const std::size_t refresh_every = std::max<std::size_t>(1, sites / 64);
  const double log_inv_phi = -std::log(model.phi);

  Philox4x32 eng(seed);
  LazyPermutation positions(innovations);
  double lower = 0.0;  // min over sites of `current`
  double exp_sum = 0.0;
  std::size_t since_refresh = 0;

  Lag u(d), gap(d), lo(d), hi(d), cursor(d), z(d);
  for (std::uint64_t k = 0; k < innovations; ++k) {
    // Descending order statistics of unit Frechet variables via Renyi's
    // representation of ascending exponential order statistics.
    exp_sum += standard_exponential(eng) / static_cast<double>(innovations - k);
    const double value = 1.0 / exp_sum;
    if (value <= lower) break;

    std::uint64_t pos = positions.next(eng);
    for (int j = d - 1; j >= 0; --j) {
      u[j] = static_cast<int>(pos % static_cast<std::uint64_t>(side)) + 1 - radius;
      pos /= static_cast<std::uint64_t>(side);
    }
    for (int j = 0; j < d; ++j) gap[j] = std::max({0, 1 - u[j], u[j] - n});
    if (kernel.weight(gap) * value <= lower) continue;

    int reach = radius;
    if (lower > 0.0) {
      const double r = std::log(value / lower) / log_inv_phi;
      if (r < reach) reach = static_cast<int>(std::floor(r));
    }
    bool empty = false;
    for (int j = 0; j < d; ++j) {
      lo[j] = std::max(1, u[j] - reach);
      hi[j] = std::min(n, u[j] + reach);
      if (lo[j] > hi[j]) empty = true;
    }
    if (!empty) {
      cursor = lo;
      std::int64_t flat = 0;
      for (int j = 0; j < d; ++j) flat += (cursor[j] - 1) * grid.stride(j);
      while (true) {
        for (int j = 0; j < d; ++j) z[j] = cursor[j] - u[j];
        const double contribution = kernel.weight(z) * value;
        double& slot = current[flat];
        if (contribution > slot) slot = contribution;

        int j = d - 1;
        while (j >= 0 && cursor[j] == hi[j]) {
          flat -= (cursor[j] - lo[j]) * grid.stride(j);
          cursor[j] = lo[j];
          --j;
        }
        if (j < 0) break;
        ++cursor[j];
        flat += grid.stride(j);
      }
    }
    if (++since_refresh >= refresh_every) {
      since_refresh = 0;
      lower = current.minCoeff();
    }
  }

  current /= truncated_v1(model, kernel);
  return GridField{grid, std::move(current), model.tag(), seed};
}

GridField simulate_brown_resnick(const BrModel& model, const Grid& grid,
                                 std::uint64_t seed,
                                 const BrSimulationConfig& config) {
  if (model.d != grid.d())
    throw DomainError("Brown-Resnick model dimension does not match the grid");
  if (!(config.tail_prob > 0.0 && config.tail_prob < 0.5))
    throw DomainError("Brown-Resnick tail probability must lie in (0, 0.5)");
  if (grid.size() > kMaxBrSites)
    throw DomainError("grid too large for dense Gaussian factorization (more than " +
                      std::to_string(kMaxBrSites) + " sites)");

  const int d = grid.d();
  const auto sites = static_cast<Eigen::Index>(grid.size());
  Lag origin(d, (grid.n() + 1) / 2);
  const auto origin_index = static_cast<Eigen::Index>(grid.index(origin));

  // Sites other than the origin, where W is random.
  std::vector<Lag> rel(static_cast<std::size_t>(sites));
  Eigen::ArrayXd delta(sites);
  for (Eigen::Index s = 0; s < sites; ++s) {
    Lag p = grid.point(static_cast<std::size_t>(s));
    for (int j = 0; j < d; ++j) p[j] -= origin[j];
    delta[s] = model.variogram(p);
    rel[static_cast<std::size_t>(s)] = std::move(p);
  }
  const Eigen::Index free_sites = sites - 1;
  auto free_to_site = [origin_index](Eigen::Index i) {
    return i < origin_index ? i : i + 1;
  };

  const bool degenerate = delta.maxCoeff() == 0.0;
  Eigen::MatrixXd factor;
  if (!degenerate && free_sites > 0) {
    Eigen::MatrixXd cov(free_sites, free_sites);
    Lag diff(d);
    for (Eigen::Index a = 0; a < free_sites; ++a) {
      const Eigen::Index sa = free_to_site(a);
      for (Eigen::Index b = 0; b <= a; ++b) {
        const Eigen::Index sb = free_to_site(b);
        for (int j = 0; j < d; ++j)
          diff[j] = rel[static_cast<std::size_t>(sa)][j] -
                    rel[static_cast<std::size_t>(sb)][j];
        cov(a, b) = cov(b, a) = delta[sa] + delta[sb] - model.variogram(diff);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      cov.diagonal().array() += 1e-10;
      llt.compute(cov);
      if (llt.info() != Eigen::Success)
        throw FactorizationError(
            "covariance of W is not positive definite at the requested sites "
            "(variogram not conditionally negative definite?)");
    }
    factor = llt.matrixL();
  }

  Philox4x32 eng(seed);
  NormalSampler normal;
  Eigen::ArrayXd current = Eigen::ArrayXd::Zero(sites);
  Eigen::VectorXd gauss(free_sites), w(free_sites);
  double gamma_sum = 0.0;
  std::int64_t points = 0;

  auto next_point = [&](double stop_level) {
    gamma_sum += standard_exponential(eng);
    const double xi = 1.0 / gamma_sum;
    if (xi <= stop_level) return 0.0;
    if (++points > config.max_points)
      throw BudgetExceeded(
          "Brown-Resnick point budget of " + std::to_string(config.max_points) +
              " exhausted (xi=" + io::format_double(xi) +
              ", stop level=" + io::format_double(stop_level) + ")",
          points - 1, xi, stop_level);
    return xi;
  };
  // W at every site, zero at the origin.
  auto draw_w = [&](Eigen::ArrayXd& full) {
    for (Eigen::Index i = 0; i < free_sites; ++i) gauss[i] = normal(eng);
    w.noalias() = factor.triangularView<Eigen::Lower>() * gauss;
    for (Eigen::Index s = 0; s < sites; ++s)
      full[s] = s == origin_index ? 0.0 : w[s < origin_index ? s : s - 1];
  };

  if (degenerate) {
    while (const double xi = next_point(current.minCoeff())) current = current.max(xi);
    return GridField{grid, std::move(current), model.tag(), seed};
  }

  Eigen::ArrayXd full(sites);
  if (config.stopping == BrStopping::normalized) {
    // Anchoring at T turns exp(W - delta) into exp(W(s) - W(T) - delta(s - T));
    // dividing by the grid mean bounds every value by |S_n|.
    const double bound = static_cast<double>(sites);
    Eigen::ArrayXd log_y(sites);
    std::vector<Lag> points_of(static_cast<std::size_t>(sites));
    for (Eigen::Index s = 0; s < sites; ++s)
      points_of[static_cast<std::size_t>(s)] = grid.point(static_cast<std::size_t>(s));
    Lag diff(d);
    while (const double xi = next_point(current.minCoeff() / bound)) {
      const auto anchor = static_cast<Eigen::Index>(
          uniform_index(eng, static_cast<std::uint64_t>(sites)));
      draw_w(full);
      const Lag& t = points_of[static_cast<std::size_t>(anchor)];
      for (Eigen::Index s = 0; s < sites; ++s) {
        const Lag& p = points_of[static_cast<std::size_t>(s)];
        for (int j = 0; j < d; ++j) diff[j] = p[j] - t[j];
        log_y[s] = full[s] - full[anchor] - model.variogram(diff);
      }
      const double top = log_y.maxCoeff();
      const Eigen::ArrayXd y = (log_y - top).exp();
      const double scale = xi / y.mean();
      current = current.max(scale * y);
    }
    return GridField{grid, std::move(current), model.tag(), seed};
  }

  const double z = detail::normal_quantile(1.0 - config.tail_prob);
  Eigen::ArrayXd inv_level(sites);  // exp(-c(s))
  for (Eigen::Index s = 0; s < sites; ++s)
    inv_level[s] = std::exp(-(delta[s] + std::sqrt(2.0 * delta[s]) * z));
  while (const double xi = next_point((current * inv_level).minCoeff())) {
    draw_w(full);
    for (Eigen::Index s = 0; s < sites; ++s) {
      if (xi <= current[s] * inv_level[s]) continue;
      current[s] = std::max(current[s], xi * std::exp(full[s] - delta[s]));
    }
  }
  return GridField{grid, std::move(current), model.tag(), seed};
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'X', 'G', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "binary field format assumes a little-endian host");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) throw Error("truncated binary field");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_binary(const GridField& field, std::ostream& out,
                  std::uint64_t config_hash) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid.d()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid.n()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.model_tag.size()));
  out.write(field.model_tag.data(),
            static_cast<std::streamsize>(field.model_tag.size()));
  put<std::uint64_t>(out, field.seed);
  put<std::uint64_t>(out, config_hash);
  for (double v : field.values) put<double>(out, v);
}

GridField read_binary(std::istream& in, std::uint64_t* config_hash) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("not a binary grid field (bad magic)");
  if (get<std::uint32_t>(in) != kVersion)
    throw Error("unsupported binary grid field version");
  const auto d = static_cast<int>(get<std::uint32_t>(in));
  const auto n = static_cast<int>(get<std::uint32_t>(in));
  const auto tag_size = get<std::uint32_t>(in);
  std::string tag(tag_size, '\0');
  if (!in.read(tag.data(), tag_size)) throw Error("truncated binary field");
  const auto seed = get<std::uint64_t>(in);
  const auto hash = get<std::uint64_t>(in);
  if (config_hash) *config_hash = hash;
  Grid grid(n, d);
  Eigen::ArrayXd values(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = get<double>(in);
  return GridField{grid, std::move(values), std::move(tag), seed};
}

void write_csv(const GridField& field, std::ostream& out) {
  const int d = field.grid.d();
  out << "# model_tag=" << field.model_tag << "\n# seed=" << field.seed << "\n";
  for (int j = 0; j < d; ++j) out << "s" << (j + 1) << ",";
  out << "value\n";
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Lag p = field.grid.point(i);
    for (int j = 0; j < d; ++j) out << p[j] << ",";
    out << io::format_double(field.values[static_cast<Eigen::Index>(i)]) << "\n";
  }
}

}  // namespace extremo
