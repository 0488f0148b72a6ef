#include "hspn/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hspn {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
  KvConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
    c.kv_[key] = value;
  }
  return c;
}

double KvConfig::get(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' is not a number: " + it->second);
  }
}

long KvConfig::get_int(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' is not an integer: " + it->second);
  }
}

std::string KvConfig::get_str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

TrainConfig TrainConfig::from(const KvConfig& kv) {
  TrainConfig c;
  c.lambda1 = kv.get("lambda1", c.lambda1);
  c.lambda2_start = kv.get("lambda2_start", c.lambda2_start);
  c.lambda2_end = kv.get("lambda2_end", c.lambda2_end);
  c.lambda3 = kv.get("lambda3", c.lambda3);
  c.lambda4 = kv.get("lambda4", c.lambda4);
  c.lambda_gp = kv.get("lambda_gp", c.lambda_gp);
  c.lr = kv.get("lr", c.lr);
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.n_critic = static_cast<int>(kv.get_int("n_critic", c.n_critic));
  c.seed = static_cast<uint64_t>(kv.get_int("seed", 0));
  c.batch = static_cast<int>(kv.get_int("batch", c.batch));
  c.max_steps = static_cast<int>(kv.get_int("max_steps", c.max_steps));
  c.emd_points = static_cast<int>(kv.get_int("emd_points", c.emd_points));
  c.slices = static_cast<int>(kv.get_int("slices", c.slices));
  c.train_on_all = kv.get_int("train_on_all", 0) != 0;
  if (c.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (c.batch < 1) throw std::invalid_argument("config: batch must be >= 1");
  if (c.n_critic < 0) throw std::invalid_argument("config: n_critic must be >= 0");
  return c;
}

DatasetConfig dataset_config_from(const KvConfig& kv) {
  DatasetConfig c;
  c.count = static_cast<int>(kv.get_int("samples", c.count));
  c.seed = static_cast<uint64_t>(kv.get_int("seed", 0));
  c.min_fraction = kv.get("min_fraction", c.min_fraction);
  c.max_fraction = kv.get("max_fraction", c.max_fraction);
  c.perturb_amp = kv.get("perturb_amp", c.perturb_amp);
  return c;
}

}  // namespace hspn
