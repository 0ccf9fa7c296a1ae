#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dgc/model/state.hpp"

namespace dgc::model {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter name so they can
// be checkpointed alongside the weights.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Updates every parameter of `state` that has a gradient; encoder
  // parameters are skipped when include_encoder is false.
  void step(ModelState& state, bool include_encoder = true);

  const AdamConfig& config() const { return config_; }
  void set_config(const AdamConfig& c) { config_ = c; }
  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t s) { steps_ = s; }

  std::map<std::string, std::vector<float>>& first_moments() { return m_; }
  std::map<std::string, std::vector<float>>& second_moments() { return v_; }
  const std::map<std::string, std::vector<float>>& first_moments() const { return m_; }
  const std::map<std::string, std::vector<float>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::map<std::string, std::vector<float>> m_;
  std::map<std::string, std::vector<float>> v_;
};

}  // namespace dgc::model
