#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dgc/model/config.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::model {

/// All trainable tensors and batch-norm running statistics of one network.
///
/// Parameters are addressed by dotted names ("enc.2.conv0.w",
/// "dec.1.block3.bn.g", "match.conv2.w", ...). The encoder is stored once
/// and applied to both images, so the Siamese branches cannot drift apart.
class ModelState {
 public:
  ModelState() = default;
  explicit ModelState(PyramidConfig config) : config_(std::move(config)) {}

  const PyramidConfig& config() const { return config_; }

  void add_param(const std::string& name, Tensor t);
  void add_batchnorm(const std::string& name, std::size_t channels);

  bool has_param(const std::string& name) const { return params_.count(name) != 0; }
  const Tensor& param(const std::string& name) const;
  ops::BatchNormStats& stats(const std::string& name);
  const ops::BatchNormStats& stats(const std::string& name) const;

  // Names in creation order (deterministic).
  const std::vector<std::string>& param_names() const { return param_order_; }
  const std::vector<std::string>& batchnorm_names() const { return bn_order_; }

  // Trainable parameters, optionally excluding the encoder.
  std::vector<Tensor> parameters(bool include_encoder = true) const;

  // Deep copy with fresh storage.
  ModelState clone() const;

  std::size_t parameter_count() const;

 private:
  PyramidConfig config_;
  std::vector<std::string> param_order_;
  std::vector<std::string> bn_order_;
  std::map<std::string, Tensor> params_;
  std::map<std::string, ops::BatchNormStats> bn_;
};

bool is_encoder_param(const std::string& name);

// He-normal convolution weights, BN gamma 1 / beta 0, small final layers.
ModelState init_state(const PyramidConfig& config, std::uint64_t seed);

}  // namespace dgc::model
