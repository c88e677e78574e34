#pragma once

#include "parasent/params.h"

namespace parasent {

struct Penalty {
  double lambda_c = 0.0;  // L2 on compositional (and head) parameters
  double lambda_w = 0.0;  // drift of W_w away from its anchor
};

// Anchor values the penalties pull toward. A null `compositional` anchors
// W_c to zero; tensors absent from the anchor set (e.g. the head) are also
// anchored to zero.
template <class T>
struct Anchors {
  const ParameterSet<T>* compositional = nullptr;
  const Matrix<T>* embeddings = nullptr;
};

// λ_c Σ‖W_c − anchor‖² + λ_w ‖W_w_anchor − W_w‖²
template <class T>
double penalty_value(const ParameterSet<T>& params, const Penalty& penalty,
                     const Anchors<T>& anchors);

template <class T>
void add_penalty_gradient(const ParameterSet<T>& params,
                          const Penalty& penalty, const Anchors<T>& anchors,
                          ParameterSet<T>& grads);

}  // namespace parasent
