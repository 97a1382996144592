// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "engine/tensor.hpp"

namespace segan::engine {

// Handle to a node of a Graph. Only meaningful for the graph that issued it.
struct Var {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::uint32_t id = kNone;

  bool valid() const noexcept { return id != kNone; }
};

// Tape for reverse-mode differentiation. Operations append nodes in
// evaluation order, so the tape is topologically sorted by construction and
// backward() is a single reverse sweep.
template <typename T>
class Graph {
 public:
  // Called during the reverse sweep with the index of the node being
  // processed; it reads grad(self) and accumulates into its inputs.
  using BackwardFn = std::function<void(Graph&, Var self)>;

  Var input(Tensor<T> value, bool requires_grad = false);

  // Parameters are referenced, not copied; they must outlive the graph.
  Var parameter(Parameter<T>& p);

  Var record(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn);

  const Tensor<T>& value(Var v) const;
  bool requires_grad(Var v) const;

  // Gradient of the last backward() sweep; empty when no path reached v.
  const Tensor<T>& grad(Var v) const;

  // Zero-initialized on first use within a sweep.
  Tensor<T>& grad_buffer(Var v);

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad of every
  // trainable parameter on the tape. Callers zero parameter gradients.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace segan::engine
