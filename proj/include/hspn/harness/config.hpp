#pragma once

#include <map>
#include <string>

#include "hspn/synthdata/dataset.hpp"

namespace hspn {

/// Flat key=value config file (lines of `key = value`, '#' comments).
class KvConfig {
 public:
  static KvConfig from_file(const std::string& path);
  static KvConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  double get(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

 private:
  std::map<std::string, std::string> kv_;
};

/// Training hyperparameters (defaults follow the harness conventions:
/// lambda1 0.1, lambda3 1, lambda4 0.05, lambda_gp 10, lr 1e-4, lambda2
/// ramping 0.1 -> 1 linearly over the epochs).
struct TrainConfig {
  double lambda1 = 0.1;
  double lambda2_start = 0.1;
  double lambda2_end = 1.0;
  double lambda3 = 1.0;
  double lambda4 = 0.05;
  double lambda_gp = 10.0;
  double lr = 1e-4;
  int epochs = 100;
  int n_critic = 5;
  uint64_t seed = 0;
  int batch = 8;

  // desk-scale knobs
  int max_steps = 0;       // 0 = no cap
  int emd_points = 256;    // EMD subsample size in the completion loss
  int slices = 1;          // image stack depth
  bool train_on_all = false;  // include the test split when training

  double lambda2_at(int epoch) const {
    if (epochs <= 1) return lambda2_end;
    const double t = static_cast<double>(epoch) / (epochs - 1);
    return lambda2_start + (lambda2_end - lambda2_start) * t;
  }

  static TrainConfig from(const KvConfig& kv);
};

DatasetConfig dataset_config_from(const KvConfig& kv);

}  // namespace hspn
