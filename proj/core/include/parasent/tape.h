#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parasent/params.h"

namespace parasent {

// Reverse-mode gradient tape over vector-valued nodes. Every node is a dense
// vector; scalars are length-1 vectors. Parameters are read from a fixed
// ParameterSet and gradients are accumulated into a matching set by
// backward().
template <class T>
class Tape {
 public:
  using NodeId = std::uint32_t;

  explicit Tape(const ParameterSet<T>& params) : params_(&params) {}

  const ParameterSet<T>& params() const { return *params_; }

  NodeId constant(Vec<T> value);
  // The whole tensor, row-major, as a vector.
  NodeId parameter(std::size_t tensor);
  NodeId row(std::size_t tensor, std::size_t r);
  // tensor * x
  NodeId matvec(std::size_t tensor, NodeId x);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  // a ⊙ mask with a constant mask.
  NodeId mul_const(NodeId a, Vec<T> mask);
  NodeId scale(NodeId a, T s);
  NodeId add_scalar(NodeId a, T s);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId abs(NodeId a);
  // Elementwise max(0, a); subgradient 0 at exactly 0.
  NodeId relu(NodeId a);
  NodeId concat(NodeId a, NodeId b);
  // Elementwise mean / sum of equally sized nodes.
  NodeId mean(std::span<const NodeId> xs);
  NodeId sum(std::span<const NodeId> xs);
  // Scalar reductions.
  NodeId sum_elements(NodeId a);
  NodeId dot(NodeId a, NodeId b);
  // Scalar cosine; throws DegenerateVectorError on zero-norm input.
  NodeId cosine(NodeId a, NodeId b);
  NodeId softmax(NodeId a);
  // Scalar sum_i p_i (ln p_i - ln(q_i + floor)) over p_i > 0.
  NodeId kl_divergence(Vec<T> target, NodeId q, T floor = T(1e-12));

  const Vec<T>& value(NodeId id) const { return nodes_[id].value; }
  T scalar(NodeId id) const { return nodes_[id].value.at(0); }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and accumulates parameter gradients into
  // `grads`, which must share the parameter layout. Root must be scalar.
  void backward(NodeId root, ParameterSet<T>& grads);

 private:
  enum class Op : std::uint8_t {
    Constant, Parameter, Row, MatVec, Add, Sub, Mul, MulConst, Scale,
    AddScalar, Sigmoid, Tanh, Abs, Relu, Concat, Mean, Sum, SumElements, Dot,
    Cosine, Softmax, Kl
  };

  struct Node {
    Op op;
    NodeId a = 0;
    NodeId b = 0;
    std::size_t tensor = 0;
    std::size_t row = 0;
    T scalar = T(0);
    Vec<T> value;
    Vec<T> grad;
    Vec<T> aux;
    std::vector<NodeId> inputs;
  };

  NodeId push(Node node);
  void require_same(NodeId a, NodeId b, const char* op) const;

  const ParameterSet<T>* params_;
  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;
// Used by the finite-difference oracle only.
extern template class Tape<long double>;

}  // namespace parasent
