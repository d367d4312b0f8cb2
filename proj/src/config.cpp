#include "rmtdetect/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "rmtdetect/moments.hpp"
#include "rmtdetect/random.hpp"

namespace rmtdetect {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string> kScenarioKeys = {"p", "q", "angles", "sigma2", "snr_db", "bandwidth", "seed"};
const std::set<std::string> kExperimentKeys = {"scenario", "n",       "y",
                                               "trials",   "master_seed", "out",
                                               "moments",  "min_noise_fraction", "coverage_margin",
                                               "histogram_bins"};

class Reader {
 public:
  explicit Reader(const KeyValueFile& kv) : kv_(kv) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = kv_.entries.find(key);
    throw ConfigError(kv_.source, it == kv_.entries.end() ? 0 : it->second.line, key, what);
  }

  const std::string& raw(const std::string& key) const { return kv_.entries.at(key).value; }

  double number(const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
      fail(key, "expected a number, got '" + t + "'");
    return v;
  }

  double real(const std::string& key) const { return number(key, raw(key)); }

  long long integer(const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      fail(key, "expected an integer, got '" + t + "'");
    return v;
  }

  int integer(const std::string& key) const {
    const long long v = integer(key, raw(key));
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(key, "out of range");
    return static_cast<int>(v);
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string t = trim(raw(key));
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      fail(key, "expected an unsigned 64-bit integer, got '" + t + "'");
    return v;
  }

  std::vector<std::string> split(const std::string& key, const std::string& text) const {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list element");
      out.push_back(item);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> v;
    for (const auto& s : split(key, raw(key))) v.push_back(number(key, s));
    return v;
  }

  // "name(a, b, ...)" -> arguments, or nullopt when `text` is not a call.
  std::optional<std::vector<std::string>> call(const std::string& key, const std::string& name) const {
    const std::string t = trim(raw(key));
    if (t.rfind(name + "(", 0) != 0) return std::nullopt;
    if (t.back() != ')') fail(key, "missing ')' in " + name + "(...)");
    return split(key, t.substr(name.size() + 1, t.size() - name.size() - 2));
  }

 private:
  const KeyValueFile& kv_;
};

}  // namespace

KeyValueFile parse_key_values(std::istream& in, const std::string& source) {
  KeyValueFile kv;
  kv.source = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "", "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, lineno, "", "missing key");
    if (value.empty()) throw ConfigError(source, lineno, key, "missing value");
    if (!kScenarioKeys.count(key) && !kExperimentKeys.count(key))
      throw ConfigError(source, lineno, key, "unknown key");
    if (kv.entries.count(key)) throw ConfigError(source, lineno, key, "duplicate key");
    kv.entries[key] = {value, lineno};
  }
  return kv;
}

KeyValueFile load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
  auto kv = parse_key_values(in, path.string());
  kv.directory = path.parent_path();
  return kv;
}

std::vector<double> ScenarioConfig::resolved_snr_db() const {
  if (!snr_range) return snr_db;
  auto rs = RandomStream::derive(seed, {kPowerStream});
  const double lo = std::pow(10.0, snr_range->lo_db / 10);
  const double hi = std::pow(10.0, snr_range->hi_db / 10);
  std::vector<double> out;
  for (int j = 0; j < q; ++j) out.push_back(10 * std::log10(lo == hi ? lo : rs.uniform(lo, hi)));
  return out;
}

Scenario<double> ScenarioConfig::build() const {
  std::vector<double> rad;
  for (double a : angles_deg) rad.push_back(a * std::numbers::pi / 180);
  const auto snr = resolved_snr_db();
  return build_scenario<double>(p, q, rad, sigma2, snr, bandwidth, seed);
}

ScenarioConfig parse_scenario(const KeyValueFile& kv) {
  Reader r(kv);
  ScenarioConfig sc;
  for (const char* key : {"p", "q"})
    if (!kv.has(key)) throw ConfigError(kv.source, 0, key, "required key missing");
  sc.p = r.integer("p");
  sc.q = r.integer("q");
  if (sc.p < 2) r.fail("p", "need p >= 2");
  if (sc.q < 0 || sc.q >= sc.p) r.fail("q", "need 0 <= q < p");
  if (kv.has("sigma2")) {
    sc.sigma2 = r.real("sigma2");
    if (!(sc.sigma2 > 0)) r.fail("sigma2", "must be > 0");
  }
  if (kv.has("bandwidth")) {
    sc.bandwidth = r.integer("bandwidth");
    if (sc.bandwidth < 0) r.fail("bandwidth", "must be >= 0");
  }
  if (kv.has("seed")) sc.seed = r.u64("seed");

  if (sc.q > 0) {
    if (!kv.has("angles")) throw ConfigError(kv.source, 0, "angles", "required when q > 0");
    if (!kv.has("snr_db")) throw ConfigError(kv.source, 0, "snr_db", "required when q > 0");
  }
  if (kv.has("angles")) {
    if (auto args = r.call("angles", "uniform")) {
      if (args->size() != 3) r.fail("angles", "uniform(lo, hi, count) takes three arguments");
      const double lo = r.number("angles", (*args)[0]);
      const double hi = r.number("angles", (*args)[1]);
      const long long count = r.integer("angles", (*args)[2]);
      if (count != sc.q) r.fail("angles", "uniform(...) count must equal q");
      for (long long i = 0; i < count; ++i)
        sc.angles_deg.push_back(count == 1 ? (lo + hi) / 2
                                           : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    } else {
      sc.angles_deg = r.reals("angles");
    }
    if (static_cast<int>(sc.angles_deg.size()) != sc.q) r.fail("angles", "need exactly q angles");
    for (double a : sc.angles_deg)
      if (!(std::abs(a) < 90)) r.fail("angles", "angles must lie strictly inside (-90, 90) degrees");
  }
  if (kv.has("snr_db")) {
    if (auto args = r.call("snr_db", "uniform")) {
      if (args->size() != 2) r.fail("snr_db", "uniform(lo, hi) takes two arguments");
      sc.snr_range = SnrRange{r.number("snr_db", (*args)[0]), r.number("snr_db", (*args)[1])};
      if (sc.snr_range->hi_db < sc.snr_range->lo_db) r.fail("snr_db", "need lo <= hi");
    } else {
      sc.snr_db = r.reals("snr_db");
      if (static_cast<int>(sc.snr_db.size()) != sc.q) r.fail("snr_db", "need exactly q values");
    }
  }
  return sc;
}

void write_scenario_config(std::ostream& out, const ScenarioConfig& sc) {
  const auto snr = sc.resolved_snr_db();
  out << std::setprecision(17);
  out << "p = " << sc.p << "\nq = " << sc.q << "\nsigma2 = " << sc.sigma2 << "\nbandwidth = " << sc.bandwidth
      << "\nseed = " << sc.seed << "\n";
  if (sc.q > 0) {
    out << "angles = ";
    for (std::size_t i = 0; i < sc.angles_deg.size(); ++i) out << (i ? ", " : "") << sc.angles_deg[i];
    out << "\nsnr_db = ";
    for (std::size_t i = 0; i < snr.size(); ++i) out << (i ? ", " : "") << snr[i];
    out << "\n";
  }
}

ExperimentConfig parse_experiment(const KeyValueFile& kv) {
  Reader r(kv);
  ExperimentConfig ec;
  if (kv.has("scenario")) {
    for (const auto& key : kScenarioKeys)
      if (kv.has(key)) r.fail(key, "scenario keys cannot be mixed with 'scenario = path'");
    std::filesystem::path path = trim(r.raw("scenario"));
    if (path.is_relative()) path = kv.directory / path;
    ec.scenario = parse_scenario(load_key_values(path));
  } else {
    ec.scenario = parse_scenario(kv);
  }
  if (kv.has("n") && kv.has("y")) r.fail("y", "give either n or y, not both");
  if (kv.has("n")) {
    for (const auto& s : r.split("n", r.raw("n"))) {
      const long long n = r.integer("n", s);
      if (n < 1 || n > 10'000'000) r.fail("n", "sample sizes must be >= 1");
      ec.sample_sizes.push_back(static_cast<int>(n));
    }
  } else if (kv.has("y")) {
    for (double y : r.reals("y")) {
      if (!(y > 0)) r.fail("y", "aspect ratios must be > 0");
      ec.sample_sizes.push_back(std::max(1, static_cast<int>(std::lround(ec.scenario.p / y))));
    }
  } else {
    throw ConfigError(kv.source, 0, "n", "required key missing (or give y)");
  }
  if (kv.has("trials")) {
    ec.trials = r.integer("trials");
    if (ec.trials < 1) r.fail("trials", "must be >= 1");
  }
  if (kv.has("master_seed")) ec.master_seed = r.u64("master_seed");
  if (kv.has("out")) ec.out_dir = trim(r.raw("out"));
  if (kv.has("moments")) {
    ec.moment_order = r.integer("moments");
    if (ec.moment_order < 1 || ec.moment_order > kMaxMomentOrder) r.fail("moments", "must lie in [1, 20]");
  }
  if (kv.has("min_noise_fraction")) {
    ec.min_noise_fraction = r.real("min_noise_fraction");
    if (!(ec.min_noise_fraction > 0 && ec.min_noise_fraction < 1)) r.fail("min_noise_fraction", "must lie in (0, 1)");
  }
  if (kv.has("coverage_margin")) {
    ec.coverage_margin = r.real("coverage_margin");
    if (!(ec.coverage_margin >= 0)) r.fail("coverage_margin", "must be >= 0");
  }
  if (kv.has("histogram_bins")) {
    ec.histogram_bins = r.integer("histogram_bins");
    if (ec.histogram_bins < 2) r.fail("histogram_bins", "must be >= 2");
  }
  return ec;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment(load_key_values(path));
}

}  // namespace rmtdetect
