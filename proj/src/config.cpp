#include "rqf/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rqf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key, "empty list element");
    out.push_back(item);
  }
  return out;
}

template <class T>
T parse_scalar(const std::string& key, const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key, "cannot parse '" + s + "'");
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(key, value)) out.push_back(parse_scalar<T>(key, item));
  return out;
}

template <class T>
T parse_single(const std::string& key, const std::string& value) {
  const auto items = split_list(key, value);
  if (items.size() != 1) throw ConfigError(key, "expects a single value");
  return parse_scalar<T>(key, items.front());
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key, "expects true or false");
}

}  // namespace

void RunConfig::validate() const {
  const auto& g = grid;
  auto require = [](bool ok, const char* key, const char* message) {
    if (!ok) throw ConfigError(key, message);
  };
  require(g.reps >= 1, "reps", "must be >= 1");
  require(workers >= 1, "workers", "must be >= 1");
  require(g.q_r >= 1, "q_r", "must be >= 1");
  require(g.q_q >= 2, "q_q", "must be >= 2");
  require(g.p >= 2 && g.p % g.q_r == 0, "p", "must be >= 2 and divisible by q_r");
  require(g.lambda_q > 0.0 && g.lambda_q < 1.0, "lambda_q", "must lie in (0,1)");
  require(!g.alphas.empty(), "alphas", "must not be empty");
  for (double a : g.alphas) require(a > 0.0 && a < 1.0, "alphas", "values must lie in (0,1)");
  for (double l : g.lambda_r) require(l > 0.0 && l < 1.0, "lambda_r", "values must lie in (0,1)");
  for (double w : g.w_r2) require(w > 0.0 && w <= 1.0, "w_r2", "values must lie in (0,1]");
  for (int n : g.n) {
    require(n >= 3 && n % g.q_q == 0, "n", "values must be >= 3 and divisible by q_q");
    require(n > g.p + 1, "n", "values must exceed p + 1 for the kurtosis tests");
    require(n >= 20, "n", "values must be >= 20 for Small's test");
  }
  require(!out_dir.empty(), "out_dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(key, "missing value");

    if (key == "p") {
      cfg.grid.p = parse_single<int>(key, value);
    } else if (key == "q_r") {
      cfg.grid.q_r = parse_single<int>(key, value);
    } else if (key == "q_q") {
      cfg.grid.q_q = parse_single<int>(key, value);
    } else if (key == "lambda_r") {
      cfg.grid.lambda_r = parse_list<double>(key, value);
    } else if (key == "lambda_q") {
      cfg.grid.lambda_q = parse_single<double>(key, value);
    } else if (key == "w_r2") {
      cfg.grid.w_r2 = parse_list<double>(key, value);
    } else if (key == "n") {
      cfg.grid.n = parse_list<int>(key, value);
    } else if (key == "reps") {
      cfg.grid.reps = parse_single<int>(key, value);
    } else if (key == "seed") {
      cfg.grid.master_seed = parse_single<std::uint64_t>(key, value);
    } else if (key == "alphas") {
      cfg.grid.alphas = parse_list<double>(key, value);
    } else if (key == "workers") {
      cfg.workers = parse_single<int>(key, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "pooling") {
      if (value == "pooled") {
        cfg.aggregation.pooling = Pooling::Pooled;
      } else if (value == "per_replication") {
        cfg.aggregation.pooling = Pooling::PerReplication;
      } else {
        throw ConfigError(key, "expects pooled or per_replication");
      }
    } else if (key == "exclude_flagged") {
      cfg.aggregation.exclude_flagged = parse_bool(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_overrides(RunConfig& config, const ConfigOverrides& o) {
  if (o.seed) config.grid.master_seed = *o.seed;
  if (o.reps) config.grid.reps = *o.reps;
  if (o.workers) config.workers = *o.workers;
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (!o.alphas.empty()) config.grid.alphas = o.alphas;
}

}  // namespace rqf
