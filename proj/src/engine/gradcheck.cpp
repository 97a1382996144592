// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "engine/ops.hpp"
#include "engine/optimizer.hpp"

namespace segan::engine {

namespace {

using Coord = std::pair<std::size_t, std::size_t>;  // (input, element)

double evaluate(const LossBuilder& build, const std::vector<Tensor<double>>& inputs,
                bool with_grad, std::vector<Tensor<double>>* grads) {
  Graph<double> g;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.input(t, with_grad));
  const Var loss = build(g, vars);
  const double value = g.value(loss)[0];
  if (with_grad) {
    g.backward(loss);
    grads->clear();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const Tensor<double>& gr = g.grad(vars[i]);
      grads->push_back(gr.empty() ? Tensor<double>(inputs[i].shape()) : gr);
    }
  }
  return value;
}

std::vector<Coord> pick_coordinates(const std::vector<Tensor<double>>& inputs,
                                    std::size_t samples, std::uint64_t seed) {
  std::vector<Coord> all;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t k = 0; k < inputs[i].size(); ++k) all.emplace_back(i, k);
  if (all.size() <= samples) return all;

  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  // Every tensor contributes, however small.
  std::set<Coord> chosen;
  std::vector<std::size_t> taken(inputs.size(), 0);
  constexpr std::size_t kPerTensor = 8;
  for (const Coord& c : all) {
    if (taken[c.first] < kPerTensor) {
      chosen.insert(c);
      ++taken[c.first];
    }
  }
  for (const Coord& c : all) {
    if (chosen.size() >= samples) break;
    chosen.insert(c);
  }
  return {chosen.begin(), chosen.end()};
}

// Values bounded away from zero so rectifier kinks are not crossed by the
// finite-difference perturbation.
Tensor<double> away_from_zero(const Shape& shape, std::uint64_t seed) {
  Tensor<double> t = sample_normal<double>(shape, seed);
  for (double& v : t.data()) v = (v >= 0 ? 0.1 : -0.1) + v;
  return t;
}

Tensor<double> normal(const Shape& shape, std::uint64_t seed, double stddev = 1.0) {
  return sample_normal<double>(shape, seed, stddev);
}

}  // namespace

GradCheckResult grad_check(const std::string& name, const LossBuilder& build,
                           std::vector<Tensor<double>> inputs,
                           const GradCheckOptions& options) {
  std::vector<Tensor<double>> analytic;
  evaluate(build, inputs, true, &analytic);

  GradCheckResult result;
  result.name = name;
  for (const auto& [i, k] : pick_coordinates(inputs, options.samples, options.seed)) {
    const double saved = inputs[i][k];
    inputs[i][k] = saved + options.eps;
    const double up = evaluate(build, inputs, false, nullptr);
    inputs[i][k] = saved - options.eps;
    const double down = evaluate(build, inputs, false, nullptr);
    inputs[i][k] = saved;

    const double numeric = (up - down) / (2.0 * options.eps);
    const double exact = analytic[i][k];
    const double denom = std::max({std::abs(numeric), std::abs(exact), options.abs_floor});
    result.max_rel_error = std::max(result.max_rel_error, std::abs(numeric - exact) / denom);
    ++result.coordinates;
  }
  return result;
}

std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& options) {
  constexpr std::size_t kWidth = 31;
  constexpr std::size_t kStride = 2;
  std::uint64_t seed = options.seed * 1000 + 1;
  auto next = [&seed] { return seed++; };
  std::vector<GradCheckResult> out;

  {
    const Tensor<double> r = normal({2, 20, 4}, next());
    out.push_back(grad_check(
        "conv1d",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, conv1d(g, v[0], v[1], v[2], kStride), r);
        },
        {normal({2, 40, 3}, next()), normal({kWidth, 3, 4}, next(), 0.2),
         normal({4}, next())},
        options));
  }
  {
    const Tensor<double> r = normal({2, 40, 3}, next());
    out.push_back(grad_check(
        "conv1d_transpose",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, conv1d_transpose(g, v[0], v[1], v[2], kStride), r);
        },
        {normal({2, 20, 4}, next()), normal({kWidth, 3, 4}, next(), 0.2),
         normal({3}, next())},
        options));
  }
  {
    const Tensor<double> r = normal({2, 32, 3}, next());
    out.push_back(grad_check(
        "prelu",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, prelu(g, v[0], v[1]), r);
        },
        {away_from_zero({2, 32, 3}, next()), normal({3}, next(), 0.25)}, options));
  }
  {
    const Tensor<double> r = normal({2, 32, 3}, next());
    out.push_back(grad_check(
        "leaky_relu",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, leaky_relu(g, v[0], 0.3), r);
        },
        {away_from_zero({2, 32, 3}, next())}, options));
  }
  {
    const VbnReference<double> ref = reference_stats(normal({4, 32, 3}, next(), 2.0));
    const Tensor<double> r = normal({2, 32, 3}, next());
    out.push_back(grad_check(
        "virtual_batch_norm",
        [&r, &ref](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, virtual_batch_norm(g, v[0], ref, v[1], v[2]), r);
        },
        {normal({2, 32, 3}, next(), 1.5), normal({3}, next()), normal({3}, next())},
        options));
  }
  {
    out.push_back(grad_check(
        "linear",
        [](Graph<double>& g, std::span<const Var> v) {
          return sum(g, linear(g, v[0], v[1], v[2]));
        },
        {normal({4, 32, 1}, next()), normal({32, 1}, next()), normal({1}, next())},
        options));
  }
  {
    const Tensor<double> r = normal({2, 32, 3}, next());
    out.push_back(grad_check(
        "tanh",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, tanh_act(g, v[0]), r);
        },
        {normal({2, 32, 3}, next())}, options));
  }
  {
    const Tensor<double> r = normal({2, 16, 5}, next());
    out.push_back(grad_check(
        "concat_channels",
        [&r](Graph<double>& g, std::span<const Var> v) {
          return dot_const(g, concat_channels(g, v[0], v[1]), r);
        },
        {normal({2, 16, 2}, next()), normal({2, 16, 3}, next())}, options));
  }
  {
    out.push_back(grad_check(
        "l1_loss",
        [](Graph<double>& g, std::span<const Var> v) { return l1_loss(g, v[0], v[1]); },
        {normal({2, 32, 2}, next()), normal({2, 32, 2}, next())}, options));
  }
  {
    // conv -> prelu -> linear -> least squares against the "real" target.
    out.push_back(grad_check(
        "lsq_loss_composite",
        [](Graph<double>& g, std::span<const Var> v) {
          const Var h = prelu(g, conv1d(g, v[0], v[1], v[2], kStride), v[3]);
          return lsq_loss(g, linear(g, h, v[4], v[5]), 1.0);
        },
        {normal({3, 32, 1}, next()), normal({kWidth, 1, 4}, next(), 0.3),
         normal({4}, next(), 0.1), normal({4}, next(), 0.25), normal({64, 1}, next(), 0.2),
         normal({1}, next())},
        options));
  }
  return out;
}

}  // namespace segan::engine
