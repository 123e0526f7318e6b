#include "extremo/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <regex>
#include <sstream>

#include "extremo/clt.hpp"
#include "extremo/error.hpp"
#include "extremo/estimators.hpp"
#include "extremo/fields.hpp"
#include "extremo/io.hpp"
#include "extremo/theory.hpp"

namespace extremo::cli {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kCommands = {"simulate", "theory", "estimate", "clt", "bias"};

const std::vector<std::pair<std::string, std::string>> kKeys = {
    {"model", "iid | mma | br"},
    {"phi", "MMA weight base in (0, 1)"},
    {"R", "MMA truncation radius"},
    {"theta", "Brown-Resnick variogram scale"},
    {"alpha", "Brown-Resnick variogram exponent in (0, 2]"},
    {"norm", "sup | euclidean"},
    {"n", "grid side length"},
    {"d", "grid dimension"},
    {"seed", "master seed"},
    {"out", "output path (stdout when absent)"},
    {"format", "bin | csv | json"},
    {"jobs", "worker threads"},
    {"lags", "\"all\", a range \"0..5\" along the first axis, or \"1,0;1,1\""},
    {"gamma", "ball radius"},
    {"sets", "A and B as \"(a1,a2),(b1,b2)\"; inf allowed"},
    {"beta1", "m = round(n^beta1)"},
    {"beta2", "r = round(n^beta2)"},
    {"m", "explicit m"},
    {"r", "explicit r"},
    {"r-trunc", "lag truncation of the Sigma plug-in"},
    {"reps", "Monte Carlo replicates"},
    {"center", "pre | true"},
    {"input", "binary field produced by simulate"},
    {"threshold", "analytic | empirical"},
    {"ns", "comma-separated grid sizes"},
    {"beta1s", "comma-separated beta1 values"},
    {"br-stopping", "normalized | quantile (Brown-Resnick stopping rule)"},
    {"tail-prob", "Brown-Resnick quantile stopping tail probability"},
    {"max-points", "Brown-Resnick Poisson point budget"},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

std::optional<double> to_real(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  double value = 0.0;
  const char* end = t.data() + t.size();
  const auto result = std::from_chars(t.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end || t.empty()) return std::nullopt;
  return value;
}

std::optional<long long> to_integer(const std::string& text) {
  const std::string t = trim(text);
  long long value = 0;
  const char* end = t.data() + t.size();
  const auto result = std::from_chars(t.data(), end, value);
  if (result.ec == std::errc() && result.ptr == end && !t.empty()) return value;
  // Scientific spelling such as 1e6.
  const auto real = to_real(t);
  if (real && std::isfinite(*real) && std::floor(*real) == *real &&
      std::abs(*real) < 9.0e15)
    return static_cast<long long>(*real);
  return std::nullopt;
}

/// Raw key-value settings; every lookup records the resolved value for the
/// config echo.
class Settings {
 public:
  Settings(std::string command, std::map<std::string, std::string> raw)
      : command_(std::move(command)), raw_(std::move(raw)) {}

  const std::string& command() const noexcept { return command_; }
  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  std::string text(const std::string& key, std::optional<std::string> fallback = {}) {
    std::string value;
    if (has(key)) {
      value = raw_.at(key);
    } else if (fallback) {
      value = *fallback;
    } else {
      throw ConfigError(key, "required");
    }
    record(key, value);
    return value;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed,
                     std::optional<std::string> fallback = {}) {
    const std::string value = text(key, std::move(fallback));
    if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(key, "'" + value + "' is not one of " + list);
    }
    return value;
  }

  double real(const std::string& key, std::optional<double> fallback = {}) {
    double value;
    if (has(key)) {
      const auto parsed = to_real(raw_.at(key));
      if (!parsed) throw ConfigError(key, "'" + raw_.at(key) + "' is not a number");
      value = *parsed;
    } else if (fallback) {
      value = *fallback;
    } else {
      throw ConfigError(key, "required");
    }
    record(key, io::format_double(value));
    return value;
  }

  long long integer(const std::string& key, std::optional<long long> fallback = {},
                    long long min = std::numeric_limits<int>::min(),
                    long long max = std::numeric_limits<int>::max()) {
    long long value;
    if (has(key)) {
      const auto parsed = to_integer(raw_.at(key));
      if (!parsed) throw ConfigError(key, "'" + raw_.at(key) + "' is not an integer");
      value = *parsed;
    } else if (fallback) {
      value = *fallback;
    } else {
      throw ConfigError(key, "required");
    }
    if (value < min || value > max)
      throw ConfigError(key, std::to_string(value) + " is outside [" + std::to_string(min) +
                                 ", " + std::to_string(max) + "]");
    record(key, std::to_string(value));
    return value;
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    std::uint64_t value = fallback;
    if (has(key)) {
      const std::string t = trim(raw_.at(key));
      const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
      if (result.ec != std::errc() || result.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key, "'" + raw_.at(key) + "' is not an unsigned 64-bit integer");
    }
    record(key, std::to_string(value));
    return value;
  }

  /// Value used by the run but excluded from the echo and hash.
  std::optional<std::string> untracked(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return raw_.at(key);
  }

  void record(const std::string& key, const std::string& value) { echo_[key] = value; }

  const std::map<std::string, std::string>& echo() const noexcept { return echo_; }

  std::string canonical() const {
    std::string text = "command=" + command_ + "\n";
    for (const auto& [k, v] : echo_) text += k + "=" + v + "\n";
    return text;
  }

  std::uint64_t hash() const { return io::fnv1a64(canonical()); }

 private:
  std::string command_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> echo_;
};

/// Runs `fn`, reporting library precondition failures against `field`.
template <class F>
auto guard(const std::string& field, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(field, e.what());
  }
}

// ---------------------------------------------------------------------------
// Resolution of shared settings

struct ResolvedModel {
  ModelSpec spec;
  std::string kind;
};

ResolvedModel resolve_model(Settings& s, int d, bool simulating) {
  const std::string kind = s.choice("model", {"iid", "mma", "br"});
  if (kind == "iid") return {ModelSpec::iid(), kind};
  if (kind == "mma") {
    const double phi = s.real("phi");
    if (!(phi > 0.0 && phi < 1.0)) throw ConfigError("phi", "must lie in (0, 1)");
    const Norm norm = guard("norm", [&] { return parse_norm(s.text("norm", "sup")); });
    std::optional<int> radius;
    if (s.has("R")) {
      radius = static_cast<int>(s.integer("R", {}, 1, 100000));
    } else {
      s.record("R", std::to_string(MmaModel::default_truncation_radius(phi)));
    }
    MmaModel model = guard("phi", [&] { return MmaModel(phi, d, radius, norm); });
    return {ModelSpec(model), kind};
  }
  const double theta = s.real("theta", 1.0);
  const double alpha = s.real("alpha", 1.0);
  const Variogram variogram = guard("theta", [&] { return Variogram(theta, alpha); });
  BrSimulationConfig config;
  if (simulating) {
    if (s.choice("br-stopping", {"normalized", "quantile"}, "normalized") == "quantile") {
      config.stopping = BrStopping::quantile;
      config.tail_prob = s.real("tail-prob", config.tail_prob);
      if (!(config.tail_prob > 0.0 && config.tail_prob < 0.5))
        throw ConfigError("tail-prob", "must lie in (0, 0.5)");
    }
    config.max_points = s.integer("max-points", config.max_points, 1,
                                  std::numeric_limits<std::int64_t>::max());
  }
  return {ModelSpec(BrModel(variogram, d), config), kind};
}

std::pair<IntervalSet, IntervalSet> resolve_sets(Settings& s) {
  const std::string text = s.text("sets", "(1,inf),(1,inf)");
  static const std::regex pattern(
      R"(^\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*,\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*$)");
  std::smatch match;
  if (!std::regex_match(text, match, pattern))
    throw ConfigError("sets", "expected \"(a1,a2),(b1,b2)\", got '" + text + "'");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const auto parsed = to_real(match[i + 1].str());
    if (!parsed) throw ConfigError("sets", "'" + match[i + 1].str() + "' is not a number");
    v[i] = *parsed;
  }
  auto sets = guard("sets", [&] {
    return std::make_pair(IntervalSet(v[0], v[1]), IntervalSet(v[2], v[3]));
  });
  s.record("sets", sets.first.to_string() + "," + sets.second.to_string());
  return sets;
}

Norm lag_norm(Settings& s) {
  return guard("norm", [&] { return parse_norm(s.text("norm", "sup")); });
}

/// Lags as listed; "all" expands to every nonzero lag within gamma.
std::vector<Lag> resolve_lag_list(Settings& s, int d, Norm norm) {
  const std::string text = trim(s.text("lags", "all"));
  std::vector<Lag> lags;
  if (text == "all") {
    const double gamma = s.real("gamma", 1.0);
    return guard("gamma", [&] { return LagSet::all_within(gamma, d, norm).lags(); });
  }
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = to_integer(text.substr(0, dots));
    const auto hi = to_integer(text.substr(dots + 2));
    if (!lo || !hi || *lo > *hi) throw ConfigError("lags", "bad range '" + text + "'");
    for (long long k = *lo; k <= *hi; ++k) {
      Lag h(d, 0);
      h[0] = static_cast<int>(k);
      lags.push_back(h);
    }
    return lags;
  }
  for (const std::string& item : split(text, ';')) {
    Lag h;
    for (const std::string& c : split(item, ',')) {
      const auto v = to_integer(c);
      if (!v) throw ConfigError("lags", "'" + c + "' is not an integer");
      h.push_back(static_cast<int>(*v));
    }
    if (static_cast<int>(h.size()) != d)
      throw ConfigError("lags", "lag '" + item + "' does not have d = " + std::to_string(d) +
                                    " components");
    lags.push_back(h);
  }
  if (lags.empty()) throw ConfigError("lags", "no lags given");
  return lags;
}

LagSet resolve_lag_set(Settings& s, int d) {
  const Norm norm = lag_norm(s);
  std::vector<Lag> lags = resolve_lag_list(s, d, norm);
  double reach = 0.0;
  for (const Lag& h : lags) reach = std::max(reach, extremo::norm(h, norm));
  const double gamma = s.real("gamma", reach);
  return guard("lags", [&] { return LagSet(lags, gamma, norm); });
}

template <class T>
std::vector<T> resolve_list(Settings& s, const std::string& key, const std::string& fallback) {
  const std::string text = s.text(key, fallback);
  std::vector<T> values;
  std::string canonical;
  for (const std::string& item : split(text, ',')) {
    if constexpr (std::is_integral_v<T>) {
      const auto v = to_integer(item);
      if (!v || *v < 2 || *v > std::numeric_limits<int>::max())
        throw ConfigError(key, "'" + item + "' is not an integer >= 2");
      values.push_back(static_cast<T>(*v));
      canonical += (canonical.empty() ? "" : ",") + std::to_string(*v);
    } else {
      const auto v = to_real(item);
      if (!v) throw ConfigError(key, "'" + item + "' is not a number");
      values.push_back(*v);
      canonical += (canonical.empty() ? "" : ",") + io::format_double(*v);
    }
  }
  if (values.empty()) throw ConfigError(key, "empty list");
  s.record(key, canonical);
  return values;
}

// ---------------------------------------------------------------------------
// Output framing

std::string csv_header(const Settings& s) {
  std::string text = "# extremo " + s.command() + "\n";
  text += "# config_hash=" + io::hex64(s.hash()) + "\n";
  for (const auto& [k, v] : s.echo()) text += "# " + k + "=" + v + "\n";
  return text;
}

std::string json_document(const Settings& s, json result) {
  json doc;
  doc["command"] = s.command();
  doc["config_hash"] = io::hex64(s.hash());
  json config = json::object();
  for (const auto& [k, v] : s.echo()) config[k] = v;
  doc["config"] = std::move(config);
  doc["result"] = std::move(result);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Commands

std::string cmd_simulate(Settings& s) {
  const int d = static_cast<int>(s.integer("d", 1, 1, 16));
  const int n = static_cast<int>(s.integer("n", {}, 2));
  const ResolvedModel model = resolve_model(s, d, true);
  const std::uint64_t seed = s.unsigned64("seed", 0);
  const std::string format = s.choice("format", {"bin", "csv", "json"}, "bin");
  const Grid grid = guard("n", [&] { return Grid(n, d); });
  const GridField field = model.spec.simulate(grid, seed);

  std::ostringstream out;
  if (format == "bin") {
    write_binary(field, out, s.hash());
    return out.str();
  }
  if (format == "csv") {
    out << csv_header(s);
    write_csv(field, out);
    return out.str();
  }
  json result;
  result["model"] = field.model_tag;
  result["n"] = n;
  result["d"] = d;
  result["seed"] = seed;
  result["values"] = std::vector<double>(field.values.begin(), field.values.end());
  return json_document(s, std::move(result));
}

std::string cmd_theory(Settings& s) {
  const int d = static_cast<int>(s.integer("d", 1, 1, 16));
  const ResolvedModel model = resolve_model(s, d, false);
  const Norm norm = lag_norm(s);
  const std::vector<Lag> lags = resolve_lag_list(s, d, norm);
  const auto [a, b] = resolve_sets(s);
  const int m = static_cast<int>(s.integer("m", 10, 1));
  const std::string format = s.choice("format", {"csv", "json"}, "csv");
  const auto rows = theory_table(model.spec.exponent(), lags, a, b, m, d);

  if (format == "csv") {
    std::ostringstream out;
    out << csv_header(s);
    write_theory_csv(rows, out);
    return out.str();
  }
  json result = json::array();
  for (const TheoryRow& row : rows)
    result.push_back({{"h", row.h},
                      {"theta", row.theta},
                      {"rho_true", row.rho_true},
                      {"rho_pre", row.rho_pre},
                      {"taylor", row.taylor}});
  return json_document(s, std::move(result));
}

GridField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("input", "cannot open '" + path + "'");
  try {
    return read_binary(in);
  } catch (const Error& e) {
    throw ConfigError("input", e.what());
  }
}

std::string cmd_estimate(Settings& s) {
  GridField field = [&] {
    if (s.has("input")) return load_field(s.text("input"));
    const int d = static_cast<int>(s.integer("d", 1, 1, 16));
    const int n = static_cast<int>(s.integer("n", {}, 2));
    const ResolvedModel model = resolve_model(s, d, true);
    const std::uint64_t seed = s.unsigned64("seed", 0);
    const Grid grid = guard("n", [&] { return Grid(n, d); });
    return model.spec.simulate(grid, seed);
  }();
  const int d = field.grid.d();
  const int n = field.grid.n();

  int m;
  if (s.has("m") || !s.has("beta1")) {
    m = static_cast<int>(s.integer("m", {}, 2));
  } else {
    const double beta1 = s.real("beta1");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must lie in (0, 1)");
    m = static_cast<int>(std::lround(std::pow(static_cast<double>(n), beta1)));
    s.record("m", std::to_string(m));
  }
  const std::string mode_text = s.choice("threshold", {"analytic", "empirical"}, "analytic");
  const ThresholdMode mode =
      mode_text == "analytic" ? ThresholdMode::analytic : ThresholdMode::empirical;
  const LagSet lags = resolve_lag_set(s, d);
  const auto [a, b] = resolve_sets(s);
  const std::string format = s.choice("format", {"csv", "json"}, "csv");

  const ThresholdSequence level = guard("threshold", [&] { return threshold(mode, field, m); });
  ExtremogramSeries series = empirical_extremogram(field, lags, a, b, level.value);
  series.m = m;

  if (format == "csv") {
    std::ostringstream out;
    out << csv_header(s);
    write_series_csv(series, out);
    return out.str();
  }
  return json_document(s, json::parse(series_to_json(series)));
}

std::string cmd_clt(Settings& s, int jobs) {
  const int d = static_cast<int>(s.integer("d", 1, 1, 16));
  const int n = static_cast<int>(s.integer("n", {}, 2));
  const ResolvedModel model = resolve_model(s, d, true);
  SequencePlan p;
  if (s.has("m")) {
    const int m = static_cast<int>(s.integer("m", {}, 2));
    const int r = static_cast<int>(s.integer("r", 1, 1));
    p = guard("m", [&] { return plan_explicit(n, d, m, r); });
  } else {
    const double beta1 = s.real("beta1", 0.4);
    const double beta2 = s.real("beta2", 0.05);
    p = guard("beta2", [&] { return plan(n, d, beta1, beta2); });
  }
  const LagSet lags = resolve_lag_set(s, d);
  const auto [a, b] = resolve_sets(s);
  CltConfig config{LagEventSets{lags, a, b}, 100, 0, Center::preasymptotic, 1, true, std::nullopt, {}};
  config.reps = static_cast<int>(s.integer("reps", 100, 2));
  config.master_seed = s.unsigned64("seed", 0);
  config.center = guard("center", [&] { return parse_center(s.choice("center", {"pre", "true"}, "pre")); });
  config.r_trunc = static_cast<int>(s.integer("r-trunc", p.r, 0, p.r));
  config.jobs = jobs;
  const std::string format = s.choice("format", {"json", "csv"}, "json");

  const CltReport report = scaled_deviations(model.spec, p, config);
  if (format == "csv") {
    std::ostringstream out;
    out << csv_header(s);
    write_clt_samples_csv(report, out);
    return out.str();
  }
  return json_document(s, json::parse(clt_report_to_json(report)));
}

std::string cmd_bias(Settings& s) {
  const int d = static_cast<int>(s.integer("d", 1, 1, 16));
  const ResolvedModel model = resolve_model(s, d, false);
  const Norm norm = lag_norm(s);
  const std::vector<Lag> lags = resolve_lag_list(s, d, norm);
  const auto [a, b] = resolve_sets(s);
  const auto ns = resolve_list<int>(s, "ns", "10000,100000,1000000,10000000");
  const auto beta1s = resolve_list<double>(s, "beta1s", "0.25,0.3333333333333333,0.4");
  const std::string format = s.choice("format", {"csv", "json"}, "csv");

  const BivariateExponent v2 = model.spec.exponent();
  std::vector<BiasRow> rows;
  for (const Lag& h : lags) {
    auto part = guard("beta1s", [&] { return bias_curve(v2, h, a, b, d, beta1s, ns); });
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (format == "csv") {
    std::ostringstream out;
    out << csv_header(s);
    write_bias_csv(rows, out);
    return out.str();
  }
  json result = json::array();
  for (const BiasRow& r : rows)
    result.push_back({{"h", r.h},
                      {"n", r.n},
                      {"beta1", r.beta1},
                      {"m", r.m},
                      {"rho_pre", r.rho_pre},
                      {"rho_true", r.rho_true},
                      {"scaled_bias", r.scaled_bias},
                      {"predicted", r.predicted},
                      {"ratio", r.ratio}});
  return json_document(s, std::move(result));
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void report_error(std::ostream& err, json body) { err << body.dump() << "\n"; }

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    const bool known = std::any_of(kKeys.begin(), kKeys.end(),
                                   [&](const auto& k) { return k.first == key; });
    if (!known) throw ConfigError(key, "unknown configuration key");
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extremogram experiments on max-stable random fields", "extremo"};
  std::string command;
  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> options;
  app.add_option("command", command, "simulate | theory | estimate | clt | bias")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "key = value configuration file; flags win");
  for (const auto& [key, help] : kKeys)
    options[key] = app.add_option("--" + key, flag_values[key], help);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    report_error(err, {{"error", "config"}, {"field", "arguments"}, {"reason", e.what()}});
    return kExitConfig;
  }

  std::optional<std::string> out_path;
  try {
    std::map<std::string, std::string> raw;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      raw = parse_config_text(buffer.str());
    }
    for (const auto& [key, option] : options)
      if (option->count() > 0) raw[key] = flag_values[key];

    Settings settings(command, raw);
    out_path = settings.untracked("out");
    int jobs = 1;
    if (auto text = settings.untracked("jobs")) {
      const auto parsed = to_integer(*text);
      if (!parsed || *parsed < 1 || *parsed > 1024)
        throw ConfigError("jobs", "must be an integer in [1, 1024]");
      jobs = static_cast<int>(*parsed);
    }

    const auto start = std::chrono::steady_clock::now();
    std::string content;
    if (command == "simulate") content = cmd_simulate(settings);
    else if (command == "theory") content = cmd_theory(settings);
    else if (command == "estimate") content = cmd_estimate(settings);
    else if (command == "clt") content = cmd_clt(settings, jobs);
    else content = cmd_bias(settings);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (out_path) {
      io::write_atomic(*out_path, content);
      std::ostringstream log;
      log << "timestamp=" << timestamp_utc() << "\n"
          << "command=" << command << "\n"
          << "config_hash=" << io::hex64(settings.hash()) << "\n"
          << "jobs=" << jobs << "\n"
          << "elapsed_seconds=" << io::format_double(seconds) << "\n";
      io::write_atomic(*out_path + ".log", log.str());
    } else {
      out << content;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    report_error(err, {{"error", "config"}, {"field", e.field()}, {"reason", e.reason()}});
    return kExitConfig;
  } catch (const ReplicateError& e) {
    report_error(err, {{"error", "runtime"}, {"replicate", e.index()}, {"message", e.what()}});
    return kExitRuntime;
  } catch (const BudgetExceeded& e) {
    report_error(err, {{"error", "runtime"},
                       {"message", e.what()},
                       {"points", e.points()},
                       {"last_xi", e.last_xi()},
                       {"stop_level", e.stop_level()}});
    return kExitRuntime;
  } catch (const std::exception& e) {
    report_error(err, {{"error", "runtime"}, {"message", e.what()}});
    return kExitRuntime;
  }
}

}  // namespace extremo::cli
