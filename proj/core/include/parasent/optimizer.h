#pragma once

#include <cstdint>
#include <vector>

#include "parasent/params.h"

namespace parasent {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators mirroring a ParameterSet.
struct AdamState {
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
  std::uint64_t step = 0;

  static AdamState for_params(const ParameterSet<float>& params);
};

// Bias-corrected Adam update. Throws NumericalError (naming the tensor) on a
// non-finite gradient before touching any parameter.
void adam_step(ParameterSet<float>& params, const ParameterSet<float>& grads,
               AdamState& state, const AdamConfig& config);

}  // namespace parasent
