#include "dgc/model/state.hpp"

#include <cmath>
#include <random>

#include "arch.hpp"
#include "dgc/error.hpp"

namespace dgc::model {

void ModelState::add_param(const std::string& name, Tensor t) {
  if (params_.count(name)) throw UsageError("duplicate parameter " + name);
  t.set_requires_grad(true);
  param_order_.push_back(name);
  params_.emplace(name, std::move(t));
}

void ModelState::add_batchnorm(const std::string& name, std::size_t channels) {
  add_param(name + ".g", Tensor::full({static_cast<std::int64_t>(channels)}, 1.0f));
  add_param(name + ".b", Tensor::zeros({static_cast<std::int64_t>(channels)}));
  bn_order_.push_back(name);
  bn_.emplace(name, ops::BatchNormStats::identity(channels));
}

const Tensor& ModelState::param(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw UsageError("state: missing parameter " + name);
  return it->second;
}

ops::BatchNormStats& ModelState::stats(const std::string& name) {
  const auto it = bn_.find(name);
  if (it == bn_.end()) throw UsageError("state: missing batchnorm " + name);
  return it->second;
}

const ops::BatchNormStats& ModelState::stats(const std::string& name) const {
  return const_cast<ModelState*>(this)->stats(name);
}

std::vector<Tensor> ModelState::parameters(bool include_encoder) const {
  std::vector<Tensor> out;
  for (const auto& n : param_order_) {
    if (include_encoder || !is_encoder_param(n)) out.push_back(params_.at(n));
  }
  return out;
}

ModelState ModelState::clone() const {
  ModelState s(config_);
  for (const auto& n : param_order_) {
    Tensor copy = params_.at(n).detach();
    s.add_param(n, copy);
  }
  s.bn_order_ = bn_order_;
  s.bn_ = bn_;
  return s;
}

std::size_t ModelState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += static_cast<std::size_t>(t.numel());
  return n;
}

bool is_encoder_param(const std::string& name) { return name.rfind("enc.", 0) == 0; }

namespace {

void add_conv(ModelState& s, const arch::ConvSpec& spec, std::mt19937_64& rng) {
  const int fan_in = spec.in * 9;
  // He init ahead of a ReLU; linear output layers start near zero so the
  // initial prediction is smooth.
  const double std = spec.batchnorm ? std::sqrt(2.0 / fan_in) : 0.1 * std::sqrt(1.0 / fan_in);
  std::normal_distribution<double> normal(0.0, std);
  std::vector<float> w(static_cast<std::size_t>(spec.out) * spec.in * 9);
  for (auto& v : w) v = static_cast<float>(normal(rng));
  s.add_param(spec.name + ".w", Tensor::from_data({spec.out, spec.in, 3, 3}, std::move(w)));
  if (spec.batchnorm) {
    s.add_batchnorm(spec.name + ".bn", static_cast<std::size_t>(spec.out));
  } else {
    s.add_param(spec.name + ".bias", Tensor::zeros({spec.out}));
  }
}

}  // namespace

ModelState init_state(const PyramidConfig& config, std::uint64_t seed) {
  config.validate();
  ModelState s(config);
  std::mt19937_64 rng(seed);
  for (int l = config.levels - 1; l >= 0; --l) {
    for (const auto& c : arch::encoder_level(config, l)) add_conv(s, c, rng);
  }
  for (int l = 0; l < config.levels; ++l) {
    for (const auto& c : arch::decoder_level(config, l)) add_conv(s, c, rng);
  }
  if (config.use_matchability) {
    for (const auto& c : arch::matchability_head(config)) add_conv(s, c, rng);
  }
  return s;
}

}  // namespace dgc::model
