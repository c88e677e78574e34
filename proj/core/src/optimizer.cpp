#include "parasent/optimizer.h"

#include <cmath>

namespace parasent {

AdamState AdamState::for_params(const ParameterSet<float>& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.count(); ++i) {
    s.m.emplace_back(params[i].size(), 0.0f);
    s.v.emplace_back(params[i].size(), 0.0f);
  }
  return s;
}

void adam_step(ParameterSet<float>& params, const ParameterSet<float>& grads,
               AdamState& state, const AdamConfig& config) {
  if (!grads.same_layout(params) || state.m.size() != params.count()) {
    throw DimensionError("adam_step: parameter/gradient/state layout mismatch");
  }
  for (std::size_t i = 0; i < grads.count(); ++i) {
    const auto& g = grads[i].data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!std::isfinite(g[k])) {
        throw NumericalError("adam_step: non-finite gradient in '" +
                             grads.name(i) + "' at offset " +
                             std::to_string(k));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const float b1 = static_cast<float>(config.beta1);
  const float b2 = static_cast<float>(config.beta2);
  for (std::size_t i = 0; i < params.count(); ++i) {
    auto& p = params[i].data();
    const auto& g = grads[i].data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= static_cast<float>(config.learning_rate * m_hat /
                                 (std::sqrt(v_hat) + config.epsilon));
    }
  }
}

}  // namespace parasent
