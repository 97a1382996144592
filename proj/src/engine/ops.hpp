// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>

#include "engine/graph.hpp"

// Differentiable operations. Activations are (batch, length, channels).
namespace segan::engine {

// Strided "same" cross-correlation. x: (B, L, Cin), w: (width, Cin, Cout),
// b: (Cout) or an invalid Var for no bias. Output (B, ceil(L/stride), Cout).
template <typename T>
Var conv1d(Graph<T>& g, Var x, Var w, Var b, std::size_t stride);

// Linear adjoint of conv1d with the same filter layout. y: (B, L, Cin),
// w: (width, Cout, Cin), output (B, L * stride, Cout).
template <typename T>
Var conv1d_transpose(Graph<T>& g, Var y, Var w, Var b, std::size_t stride);

// Per-channel learnable negative slope a: (C).
template <typename T>
Var prelu(Graph<T>& g, Var x, Var a);

template <typename T>
Var leaky_relu(Graph<T>& g, Var x, T alpha = T(0.3));

template <typename T>
Var tanh_act(Graph<T>& g, Var x);

// Frozen statistics of the reference batch, per channel.
template <typename T>
struct VbnReference {
  Tensor<T> mean;
  Tensor<T> var;
  double count = 0.0;

  bool ready() const noexcept { return count > 0.0 && !mean.empty(); }
};

// Per-channel batch statistics over (batch, length) of x: (B, L, C).
template <typename T>
VbnReference<T> reference_stats(const Tensor<T>& x);

inline constexpr double kVbnEpsilon = 1e-5;

// Virtual batch norm: each example is normalized with statistics that mix
// the reference batch (weight Nref/(Nref+1)) and the example itself
// (weight 1/(Nref+1)). Gradients flow through the example's own statistics;
// the reference statistics are constants.
template <typename T>
Var virtual_batch_norm(Graph<T>& g, Var x, const VbnReference<T>& ref,
                       Var gamma, Var beta, double eps = kVbnEpsilon);

// Channel-axis concatenation of (B, L, Ca) and (B, L, Cb).
template <typename T>
Var concat_channels(Graph<T>& g, Var a, Var b);

// Affine map of the flattened input. x: any (B, ...) shape with N trailing
// elements, w: (N, M), b: (M). Output (B, M).
template <typename T>
Var linear(Graph<T>& g, Var x, Var w, Var b);

// mean(|a - b|); the subgradient at a == b is 0.
template <typename T>
Var l1_loss(Graph<T>& g, Var a, Var b);

// 0.5 * mean((d - target)^2)
template <typename T>
Var lsq_loss(Graph<T>& g, Var d, T target);

template <typename T>
Var sum(Graph<T>& g, Var x);

template <typename T>
Var add(Graph<T>& g, Var a, Var b);

template <typename T>
Var scale(Graph<T>& g, Var x, T factor);

// sum(x * weights) with constant weights; projects a tensor to a scalar.
template <typename T>
Var dot_const(Graph<T>& g, Var x, const Tensor<T>& weights);

}  // namespace segan::engine
