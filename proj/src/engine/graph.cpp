// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/graph.hpp"

#include <sstream>

namespace segan::engine {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    fail(ErrorCode::kInternal, "variable does not belong to this graph");
  }
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) {
    fail(ErrorCode::kInternal, "variable does not belong to this graph");
  }
  return nodes_[v.id];
}

template <typename T>
Var Graph<T>::input(Tensor<T> value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::parameter(Parameter<T>& p) {
  Node n;
  n.param = &p;
  n.requires_grad = p.trainable;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::record(Tensor<T> value, std::initializer_list<Var> inputs,
                     BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) {
    if (in.valid() && node(in).requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

template <typename T>
bool Graph<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  return node(v).grad;
}

template <typename T>
Tensor<T>& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.shape() != value(v).shape()) n.grad = Tensor<T>(value(v).shape());
  return n.grad;
}

template <typename T>
void Graph<T>::backward(Var loss) {
  if (value(loss).size() != 1) {
    fail(ErrorCode::kNonScalarLoss,
         "backward needs a scalar loss, got shape " + shape_string(value(loss).shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor<T>();
  if (!node(loss).requires_grad) return;

  grad_buffer(loss).fill(T{1});
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, Var{i});
    } else if (n.param != nullptr) {
      Tensor<T>& acc = n.param->grad;
      if (acc.shape() != n.grad.shape()) n.param->zero_grad();
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += n.grad[k];
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace segan::engine
