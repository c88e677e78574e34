#include "parasent/tape.h"

#include <cmath>
#include <utility>

namespace parasent {

template <class T>
typename Tape<T>::NodeId Tape<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

template <class T>
void Tape<T>::require_same(NodeId a, NodeId b, const char* op) const {
  detail::require(nodes_[a].value.size() == nodes_[b].value.size(), op,
                  nodes_[a].value.size(), nodes_[b].value.size());
}

template <class T>
typename Tape<T>::NodeId Tape<T>::constant(Vec<T> value) {
  Node n{Op::Constant};
  n.value = std::move(value);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::parameter(std::size_t tensor) {
  Node n{Op::Parameter};
  n.tensor = tensor;
  n.value = (*params_)[tensor].data();
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::row(std::size_t tensor, std::size_t r) {
  const auto& m = (*params_)[tensor];
  if (r >= m.rows()) {
    throw DimensionError("row index " + std::to_string(r) + " out of range " +
                         std::to_string(m.rows()));
  }
  Node n{Op::Row};
  n.tensor = tensor;
  n.row = r;
  const auto src = m.row(r);
  n.value.assign(src.begin(), src.end());
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::matvec(std::size_t tensor, NodeId x) {
  Node n{Op::MatVec};
  n.tensor = tensor;
  n.a = x;
  n.value = parasent::matvec((*params_)[tensor],
                             std::span<const T>(nodes_[x].value));
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::add(NodeId a, NodeId b) {
  require_same(a, b, "add");
  Node n{Op::Add};
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value;
  const auto& vb = nodes_[b].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += vb[i];
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::sub(NodeId a, NodeId b) {
  require_same(a, b, "sub");
  Node n{Op::Sub};
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value;
  const auto& vb = nodes_[b].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] -= vb[i];
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::mul(NodeId a, NodeId b) {
  require_same(a, b, "mul");
  Node n{Op::Mul};
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value;
  const auto& vb = nodes_[b].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= vb[i];
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::mul_const(NodeId a, Vec<T> mask) {
  detail::require(nodes_[a].value.size() == mask.size(), "mul_const",
                  nodes_[a].value.size(), mask.size());
  Node n{Op::MulConst};
  n.a = a;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= mask[i];
  n.aux = std::move(mask);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::scale(NodeId a, T s) {
  Node n{Op::Scale};
  n.a = a;
  n.scalar = s;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x *= s;
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::add_scalar(NodeId a, T s) {
  Node n{Op::AddScalar};
  n.a = a;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x += s;
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::sigmoid(NodeId a) {
  Node n{Op::Sigmoid};
  n.a = a;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x = parasent::sigmoid(x);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::tanh(NodeId a) {
  Node n{Op::Tanh};
  n.a = a;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x = std::tanh(x);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::abs(NodeId a) {
  Node n{Op::Abs};
  n.a = a;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x = std::abs(x);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::relu(NodeId a) {
  Node n{Op::Relu};
  n.a = a;
  n.value = nodes_[a].value;
  for (auto& x : n.value) x = x > T(0) ? x : T(0);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::concat(NodeId a, NodeId b) {
  Node n{Op::Concat};
  n.a = a;
  n.b = b;
  n.value = nodes_[a].value;
  n.value.insert(n.value.end(), nodes_[b].value.begin(),
                 nodes_[b].value.end());
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::mean(std::span<const NodeId> xs) {
  NodeId s = sum(xs);
  nodes_[s].op = Op::Mean;
  const T inv = T(1) / static_cast<T>(xs.size());
  for (auto& x : nodes_[s].value) x *= inv;
  nodes_[s].scalar = inv;
  return s;
}

template <class T>
typename Tape<T>::NodeId Tape<T>::sum(std::span<const NodeId> xs) {
  if (xs.empty()) throw DimensionError("sum/mean over zero nodes");
  Node n{Op::Sum};
  n.inputs.assign(xs.begin(), xs.end());
  n.value = nodes_[xs[0]].value;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    require_same(xs[0], xs[k], "sum");
    const auto& v = nodes_[xs[k]].value;
    for (std::size_t i = 0; i < v.size(); ++i) n.value[i] += v[i];
  }
  n.scalar = T(1);
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::sum_elements(NodeId a) {
  Node n{Op::SumElements};
  n.a = a;
  T acc = T(0);
  for (T x : nodes_[a].value) acc += x;
  n.value = {acc};
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::dot(NodeId a, NodeId b) {
  require_same(a, b, "dot");
  Node n{Op::Dot};
  n.a = a;
  n.b = b;
  n.value = {parasent::dot(std::span<const T>(nodes_[a].value),
                           std::span<const T>(nodes_[b].value))};
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::cosine(NodeId a, NodeId b) {
  require_same(a, b, "cosine");
  const auto& u = nodes_[a].value;
  const auto& v = nodes_[b].value;
  const T nu = norm(std::span<const T>(u));
  const T nv = norm(std::span<const T>(v));
  if (nu == T(0) || nv == T(0)) {
    throw DegenerateVectorError("cosine: zero-norm input vector");
  }
  Node n{Op::Cosine};
  n.a = a;
  n.b = b;
  n.value = {parasent::dot(std::span<const T>(u), std::span<const T>(v)) /
             (nu * nv)};
  n.aux = {nu, nv};
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::softmax(NodeId a) {
  Node n{Op::Softmax};
  n.a = a;
  n.value = parasent::softmax(std::span<const T>(nodes_[a].value));
  return push(std::move(n));
}

template <class T>
typename Tape<T>::NodeId Tape<T>::kl_divergence(Vec<T> target, NodeId q,
                                                T floor) {
  const auto& qv = nodes_[q].value;
  detail::require(target.size() == qv.size(), "kl_divergence", target.size(),
                  qv.size());
  Node n{Op::Kl};
  n.a = q;
  n.scalar = floor;
  T acc = T(0);
  for (std::size_t i = 0; i < qv.size(); ++i) {
    if (target[i] > T(0)) {
      acc += target[i] * (std::log(target[i]) - std::log(qv[i] + floor));
    }
  }
  n.value = {acc};
  n.aux = std::move(target);
  return push(std::move(n));
}

template <class T>
void Tape<T>::backward(NodeId root, ParameterSet<T>& grads) {
  if (!grads.same_layout(*params_)) {
    throw DimensionError("backward: gradient set layout differs from params");
  }
  if (nodes_[root].value.size() != 1) {
    throw DimensionError("backward: root must be scalar");
  }
  if (!std::isfinite(nodes_[root].value[0])) {
    throw NumericalError("backward: non-finite loss");
  }
  for (NodeId i = 0; i <= root; ++i) {
    nodes_[i].grad.assign(nodes_[i].value.size(), T(0));
  }
  nodes_[root].grad[0] = T(1);

  for (NodeId id = root + 1; id-- > 0;) {
    Node& n = nodes_[id];
    const Vec<T>& g = n.grad;
    auto grad_of = [this](NodeId k) -> Vec<T>& { return nodes_[k].grad; };
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Parameter: {
        auto& dst = grads[n.tensor].data();
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        break;
      }
      case Op::Row: {
        auto dst = grads[n.tensor].row(n.row);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        break;
      }
      case Op::MatVec: {
        const auto& w = (*params_)[n.tensor];
        auto& dw = grads[n.tensor];
        const auto& x = nodes_[n.a].value;
        auto& dx = grad_of(n.a);
        for (std::size_t r = 0; r < w.rows(); ++r) {
          const T gr = g[r];
          if (gr == T(0)) continue;
          const auto wr = w.row(r);
          auto dwr = dw.row(r);
          for (std::size_t c = 0; c < w.cols(); ++c) {
            dwr[c] += gr * x[c];
            dx[c] += gr * wr[c];
          }
        }
        break;
      }
      case Op::Add: {
        auto& da = grad_of(n.a);
        auto& db = grad_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i];
          db[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        auto& da = grad_of(n.a);
        auto& db = grad_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i];
          db[i] -= g[i];
        }
        break;
      }
      case Op::Mul: {
        const auto& va = nodes_[n.a].value;
        const auto& vb = nodes_[n.b].value;
        auto& da = grad_of(n.a);
        auto& db = grad_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] * vb[i];
          db[i] += g[i] * va[i];
        }
        break;
      }
      case Op::MulConst: {
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.aux[i];
        break;
      }
      case Op::Scale: {
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.scalar;
        break;
      }
      case Op::AddScalar: {
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        break;
      }
      case Op::Sigmoid: {
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T y = n.value[i];
          da[i] += g[i] * y * (T(1) - y);
        }
        break;
      }
      case Op::Tanh: {
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T y = n.value[i];
          da[i] += g[i] * (T(1) - y * y);
        }
        break;
      }
      case Op::Abs: {
        const auto& va = nodes_[n.a].value;
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T s = va[i] > T(0) ? T(1) : (va[i] < T(0) ? T(-1) : T(0));
          da[i] += g[i] * s;
        }
        break;
      }
      case Op::Relu: {
        const auto& va = nodes_[n.a].value;
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (va[i] > T(0)) da[i] += g[i];
        }
        break;
      }
      case Op::Concat: {
        auto& da = grad_of(n.a);
        auto& db = grad_of(n.b);
        const std::size_t na = da.size();
        for (std::size_t i = 0; i < na; ++i) da[i] += g[i];
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[na + i];
        break;
      }
      case Op::Mean:
      case Op::Sum: {
        for (NodeId k : n.inputs) {
          auto& dk = grad_of(k);
          for (std::size_t i = 0; i < g.size(); ++i) dk[i] += g[i] * n.scalar;
        }
        break;
      }
      case Op::SumElements: {
        auto& da = grad_of(n.a);
        for (auto& x : da) x += g[0];
        break;
      }
      case Op::Dot: {
        const auto& va = nodes_[n.a].value;
        const auto& vb = nodes_[n.b].value;
        auto& da = grad_of(n.a);
        auto& db = grad_of(n.b);
        for (std::size_t i = 0; i < va.size(); ++i) {
          da[i] += g[0] * vb[i];
          db[i] += g[0] * va[i];
        }
        break;
      }
      case Op::Cosine: {
        // d cos / du = v / (|u||v|) - cos * u / |u|^2
        const auto& u = nodes_[n.a].value;
        const auto& v = nodes_[n.b].value;
        const T nu = n.aux[0];
        const T nv = n.aux[1];
        const T c = n.value[0];
        const T inv = T(1) / (nu * nv);
        auto& du = grad_of(n.a);
        auto& dv = grad_of(n.b);
        for (std::size_t i = 0; i < u.size(); ++i) {
          du[i] += g[0] * (v[i] * inv - c * u[i] / (nu * nu));
          dv[i] += g[0] * (u[i] * inv - c * v[i] / (nv * nv));
        }
        break;
      }
      case Op::Softmax: {
        T gy = T(0);
        for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * n.value[i];
        auto& da = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += n.value[i] * (g[i] - gy);
        }
        break;
      }
      case Op::Kl: {
        const auto& q = nodes_[n.a].value;
        auto& dq = grad_of(n.a);
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (n.aux[i] > T(0)) dq[i] -= g[0] * n.aux[i] / (q[i] + n.scalar);
        }
        break;
      }
    }
  }
}

template class Tape<float>;
template class Tape<double>;
template class Tape<long double>;

}  // namespace parasent
