// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "engine/graph.hpp"

namespace segan::engine {

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates sampled across all checked tensors (all of them when fewer).
  std::size_t samples = 128;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error, so coordinates whose true
  // derivative is ~0 are compared absolutely.
  double abs_floor = 1e-8;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

// Builds a scalar loss from the graph variables bound to `inputs`.
using LossBuilder = std::function<Var(Graph<double>&, std::span<const Var>)>;

// Compares reverse-mode gradients of every input against central differences
// (f(t + eps) - f(t - eps)) / (2 eps) and returns the worst relative error
// max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradCheckResult grad_check(const std::string& name, const LossBuilder& build,
                           std::vector<Tensor<double>> inputs,
                           const GradCheckOptions& options = {});

// Finite-difference checks of every differentiable operation of the engine
// at the shapes the model uses (filter width 31, stride 2), plus a
// conv -> prelu -> linear -> least-squares composite.
std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& options = {});

}  // namespace segan::engine
