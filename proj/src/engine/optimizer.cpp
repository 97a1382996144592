// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/optimizer.hpp"

#include <cmath>
#include <random>

namespace segan::engine {

template <typename T>
void rmsprop_update(std::span<T> value, std::span<const T> grad, std::span<T> cache,
                    const RmsPropOptions& options) {
  const T rho = static_cast<T>(options.rho);
  const T lr = static_cast<T>(options.learning_rate);
  const T eps = static_cast<T>(options.epsilon);
  for (std::size_t i = 0; i < value.size(); ++i) {
    const T g = grad[i];
    cache[i] = rho * cache[i] + (T{1} - rho) * g * g;
    value[i] -= lr * g / (std::sqrt(cache[i]) + eps);
  }
}

template <typename T>
void RmsProp<T>::step(ParameterStore<T>& params) {
  if (cache_.size() != params.size()) {
    cache_.resize(params.size());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = params[i];
    if (!p.trainable) continue;
    if (cache_[i].size() != p.value.size()) cache_[i].assign(p.value.size(), T{0});
    if (p.grad.size() != p.value.size()) continue;
    rmsprop_update<T>(p.value.data(), p.grad.data(), cache_[i], options_);
  }
}

template <typename T>
Tensor<T> sample_normal(const Shape& shape, std::uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor<T> out(shape);
  for (T& v : out.data()) v = static_cast<T>(dist(rng));
  return out;
}

template void rmsprop_update<float>(std::span<float>, std::span<const float>,
                                    std::span<float>, const RmsPropOptions&);
template void rmsprop_update<double>(std::span<double>, std::span<const double>,
                                     std::span<double>, const RmsPropOptions&);
template class RmsProp<float>;
template class RmsProp<double>;
template Tensor<float> sample_normal<float>(const Shape&, std::uint64_t, double);
template Tensor<double> sample_normal<double>(const Shape&, std::uint64_t, double);

}  // namespace segan::engine
