#include "dgc/model/optimizer.hpp"

#include <cmath>

namespace dgc::model {

void Adam::step(ModelState& state, bool include_encoder) {
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (const auto& name : state.param_names()) {
    if (!include_encoder && is_encoder_param(name)) continue;
    Tensor p = state.param(name);
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.empty()) {
      m.assign(g.size(), 0.0f);
      v.assign(g.size(), 0.0f);
    }
    auto w = p.mutable_data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = config_.lr * (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      w[i] = static_cast<float>(w[i] - update);
    }
  }
}

}  // namespace dgc::model
