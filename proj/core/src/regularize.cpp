#include "parasent/regularize.h"

namespace parasent {
namespace {

template <class T>
const Matrix<T>* anchor_for(const ParameterSet<T>& params, std::size_t i,
                            const Anchors<T>& anchors) {
  const auto& name = params.name(i);
  if (name == kWordEmbeddings) {
    if (anchors.embeddings == nullptr) {
      throw ConfigError("drift penalty requires an embedding anchor");
    }
    if (!anchors.embeddings->same_shape(params[i])) {
      throw DimensionError("embedding anchor shape differs from W_w");
    }
    return anchors.embeddings;
  }
  if (anchors.compositional == nullptr) return nullptr;
  const auto j = anchors.compositional->find(name);
  if (!j) return nullptr;
  const auto& a = (*anchors.compositional)[*j];
  if (!a.same_shape(params[i])) {
    throw DimensionError("anchor for '" + name + "' has a different shape");
  }
  return &a;
}

template <class T>
double weight_for(const std::string& name, const Penalty& p) {
  return name == kWordEmbeddings ? p.lambda_w : p.lambda_c;
}

}  // namespace

template <class T>
double penalty_value(const ParameterSet<T>& params, const Penalty& penalty,
                     const Anchors<T>& anchors) {
  double total = 0.0;
  for (std::size_t i = 0; i < params.count(); ++i) {
    const double lambda = weight_for<T>(params.name(i), penalty);
    if (lambda == 0.0) continue;
    const auto* anchor = anchor_for(params, i, anchors);
    const auto& v = params[i].data();
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double diff = static_cast<double>(v[k]) -
                          (anchor ? static_cast<double>(anchor->data()[k]) : 0.0);
      acc += diff * diff;
    }
    total += lambda * acc;
  }
  return total;
}

template <class T>
void add_penalty_gradient(const ParameterSet<T>& params,
                          const Penalty& penalty, const Anchors<T>& anchors,
                          ParameterSet<T>& grads) {
  for (std::size_t i = 0; i < params.count(); ++i) {
    const double lambda = weight_for<T>(params.name(i), penalty);
    if (lambda == 0.0) continue;
    const auto* anchor = anchor_for(params, i, anchors);
    const auto& v = params[i].data();
    auto& g = grads[i].data();
    const T two_lambda = static_cast<T>(2.0 * lambda);
    for (std::size_t k = 0; k < v.size(); ++k) {
      g[k] += two_lambda * (v[k] - (anchor ? anchor->data()[k] : T(0)));
    }
  }
}

template double penalty_value<float>(const ParameterSet<float>&,
                                     const Penalty&, const Anchors<float>&);
template double penalty_value<double>(const ParameterSet<double>&,
                                      const Penalty&, const Anchors<double>&);
template void add_penalty_gradient<float>(const ParameterSet<float>&,
                                          const Penalty&,
                                          const Anchors<float>&,
                                          ParameterSet<float>&);
template void add_penalty_gradient<double>(const ParameterSet<double>&,
                                           const Penalty&,
                                           const Anchors<double>&,
                                           ParameterSet<double>&);

}  // namespace parasent
