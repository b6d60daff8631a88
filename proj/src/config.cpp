#include "phasefb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "phasefb/types.hpp"

namespace phasefb {

namespace {

constexpr double kSpeedOfLight = 299'792'458.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F&& one) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(one(key, item));
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"antennas", [](auto& c, auto& k, auto& v) { c.antennas = parse_list<int>(k, v, parse_int); }},
      {"users", [](auto& c, auto& k, auto& v) { c.users = parse_int(k, v); }},
      {"paths", [](auto& c, auto& k, auto& v) { c.paths = parse_list<int>(k, v, parse_int); }},
      {"bits", [](auto& c, auto& k, auto& v) { c.bits = parse_list<int>(k, v, parse_int); }},
      {"bits_per_path", [](auto& c, auto& k, auto& v) { c.bits_per_path = parse_int(k, v); }},
      {"power_dbm",
       [](auto& c, auto& k, auto& v) { c.power_dbm = parse_list<double>(k, v, parse_double); }},
      {"noise_dbm", [](auto& c, auto& k, auto& v) { c.noise_dbm = parse_double(k, v); }},
      {"ul_freq_ghz", [](auto& c, auto& k, auto& v) { c.ul_freq_ghz = parse_double(k, v); }},
      {"dl_freq_ghz", [](auto& c, auto& k, auto& v) { c.dl_freq_ghz = parse_double(k, v); }},
      {"spacing_m", [](auto& c, auto& k, auto& v) { c.spacing_m = parse_double(k, v); }},
      {"isd_m", [](auto& c, auto& k, auto& v) { c.isd_m = parse_double(k, v); }},
      {"min_distance_m", [](auto& c, auto& k, auto& v) { c.min_distance_m = parse_double(k, v); }},
      {"excess_path_m", [](auto& c, auto& k, auto& v) { c.excess_path_m = parse_double(k, v); }},
      {"pl_ref_db", [](auto& c, auto& k, auto& v) { c.pl_ref_db = parse_double(k, v); }},
      {"pl_ref_distance_m",
       [](auto& c, auto& k, auto& v) { c.pl_ref_distance_m = parse_double(k, v); }},
      {"pl_exponent", [](auto& c, auto& k, auto& v) { c.pl_exponent = parse_double(k, v); }},
      {"decay_ratio", [](auto& c, auto& k, auto& v) { c.decay_ratio = parse_double(k, v); }},
      {"aoa_sigma", [](auto& c, auto& k, auto& v) { c.aoa_sigma = parse_double(k, v); }},
      {"gain_rel_sigma", [](auto& c, auto& k, auto& v) { c.gain_rel_sigma = parse_double(k, v); }},
      {"reconstruction",
       [](auto& c, auto& k, auto& v) {
         if (v == "mmse") c.reconstruction = ReconstructionMode::kMmse;
         else if (v == "no_feedback") c.reconstruction = ReconstructionMode::kNoFeedback;
         else if (v == "dft") c.reconstruction = ReconstructionMode::kDftBaseline;
         else throw ConfigError(k, "expected mmse, no_feedback or dft");
       }},
      {"precoder",
       [](auto& c, auto& k, auto& v) {
         if (v == "gpip") c.precoder = PrecoderKind::kGpip;
         else if (v == "zf") c.precoder = PrecoderKind::kZf;
         else if (v == "wmmse") c.precoder = PrecoderKind::kWmmse;
         else throw ConfigError(k, "expected gpip, zf or wmmse");
       }},
      {"allocator",
       [](auto& c, auto& k, auto& v) {
         if (v == "greedy") c.allocator = AllocatorKind::kGreedy;
         else if (v == "uniform") c.allocator = AllocatorKind::kUniform;
         else if (v == "none") c.allocator = AllocatorKind::kNone;
         else throw ConfigError(k, "expected greedy, uniform or none");
       }},
      {"no_feedback_full_cov",
       [](auto& c, auto& k, auto& v) { c.no_feedback_full_cov = parse_bool(k, v); }},
      {"methods",
       [](auto& c, auto& k, auto& v) {
         c.methods = split_list(v);
         if (c.methods.empty()) throw ConfigError(k, "list must not be empty");
       }},
      {"trials", [](auto& c, auto& k, auto& v) { c.trials = parse_int(k, v); }},
      {"mc_draws", [](auto& c, auto& k, auto& v) { c.mc_draws = parse_int(k, v); }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         std::uint64_t s = 0;
         const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
         if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
           throw ConfigError(k, "expected an unsigned 64-bit integer");
         }
         c.seed = s;
       }},
      {"workers", [](auto& c, auto& k, auto& v) { c.workers = parse_int(k, v); }},
      {"gpip_epsilon", [](auto& c, auto& k, auto& v) { c.gpip_epsilon = parse_double(k, v); }},
      {"gpip_max_iter", [](auto& c, auto& k, auto& v) { c.gpip_max_iter = parse_int(k, v); }},
      {"wmmse_iters", [](auto& c, auto& k, auto& v) { c.wmmse_iters = parse_int(k, v); }},
  };
  return table;
}

const std::set<std::string>& known_methods() {
  static const std::set<std::string> m = {
      "wmmse_perfect", "gpip_perfect", "gpip_mmse_cov", "gpip_mmse", "zf_mmse",
      "gpip_nofb_cov", "zf_nofb",      "zf_ul",         "zf_dft",    "gpip_dft",
      "gpip_est_cov",  "zf_est"};
  return m;
}

}  // namespace

double ScenarioConfig::lambda_ul() const { return kSpeedOfLight / (ul_freq_ghz * 1e9); }
double ScenarioConfig::lambda_dl() const { return kSpeedOfLight / (dl_freq_ghz * 1e9); }
double ScenarioConfig::spacing() const { return spacing_m > 0.0 ? spacing_m : lambda_ul() / 2.0; }
double ScenarioConfig::noise_watts() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  require(!antennas.empty(), "antennas", "must not be empty");
  for (int n : antennas) require(n >= 1, "antennas", "must be >= 1");
  require(users >= 1, "users", "must be >= 1");
  require(!paths.empty(), "paths", "must not be empty");
  for (int l : paths) require(l >= 1, "paths", "must be >= 1");
  require(!bits.empty(), "bits", "must not be empty");
  for (int b : bits) require(b >= 0 && b <= 62, "bits", "must lie in [0, 62]");
  require(bits_per_path >= 0 && bits_per_path <= 62, "bits_per_path", "must lie in [0, 62]");
  require(!power_dbm.empty(), "power_dbm", "must not be empty");
  require(ul_freq_ghz > 0.0, "ul_freq_ghz", "must be positive");
  require(dl_freq_ghz > 0.0, "dl_freq_ghz", "must be positive");
  require(spacing_m >= 0.0, "spacing_m", "must be nonnegative");
  require(isd_m > 0.0, "isd_m", "must be positive");
  require(min_distance_m > 0.0, "min_distance_m", "must be positive");
  require(excess_path_m >= 0.0, "excess_path_m", "must be nonnegative");
  require(pl_ref_distance_m > 0.0, "pl_ref_distance_m", "must be positive");
  require(pl_exponent >= 0.0, "pl_exponent", "must be nonnegative");
  require(decay_ratio > 0.0 && decay_ratio <= 1.0, "decay_ratio", "must lie in (0, 1]");
  require(aoa_sigma >= 0.0, "aoa_sigma", "must be nonnegative");
  require(gain_rel_sigma >= 0.0, "gain_rel_sigma", "must be nonnegative");
  for (const auto& m : methods) {
    if (!known_methods().count(m)) throw ConfigError("methods", "unknown method '" + m + "'");
  }
  require(trials >= 1, "trials", "must be >= 1");
  require(mc_draws >= 1, "mc_draws", "must be >= 1");
  require(workers >= 0, "workers", "must be >= 0");
  require(gpip_epsilon > 0.0, "gpip_epsilon", "must be positive");
  require(gpip_max_iter >= 1, "gpip_max_iter", "must be >= 1");
  require(wmmse_iters >= 0, "wmmse_iters", "must be >= 0");
}

ScenarioConfig parse_config(std::istream& in, std::ostream* log) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (value.empty()) throw ConfigError(key, "missing value");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    it->second(cfg, key, value);
  }
  if (log) {
    for (const auto& [key, _] : setters()) {
      if (!seen.count(key)) *log << "config: " << key << " not set, using default\n";
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path, std::ostream* log) {
  std::ifstream in(path);
  if (!in) throw ConfigError("path", "cannot open '" + path + "'");
  return parse_config(in, log);
}

void apply_paper_scale(ScenarioConfig& cfg) {
  cfg.users = 16;
  cfg.antennas = {32, 64, 128, 256};
}

std::string to_string(ReconstructionMode m) {
  switch (m) {
    case ReconstructionMode::kMmse: return "mmse";
    case ReconstructionMode::kNoFeedback: return "no_feedback";
    case ReconstructionMode::kDftBaseline: return "dft";
  }
  return "?";
}

std::string to_string(PrecoderKind p) {
  switch (p) {
    case PrecoderKind::kGpip: return "gpip";
    case PrecoderKind::kZf: return "zf";
    case PrecoderKind::kWmmse: return "wmmse";
  }
  return "?";
}

std::string to_string(AllocatorKind a) {
  switch (a) {
    case AllocatorKind::kGreedy: return "greedy";
    case AllocatorKind::kUniform: return "uniform";
    case AllocatorKind::kNone: return "none";
  }
  return "?";
}

}  // namespace phasefb
