// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "engine/tensor.hpp"

namespace segan::engine {

struct RmsPropOptions {
  double learning_rate = 2e-4;
  double rho = 0.9;
  double epsilon = 1e-6;
};

// RMSprop without momentum:
//   cache <- rho * cache + (1 - rho) * g^2
//   theta <- theta - lr * g / (sqrt(cache) + eps)
// One mean-square cache per parameter element; state is created lazily and
// sized from the store on the first step. Frozen parameters are skipped.
template <typename T>
class RmsProp {
 public:
  explicit RmsProp(RmsPropOptions options = {}) : options_(options) {}

  void step(ParameterStore<T>& params);

  const RmsPropOptions& options() const noexcept { return options_; }
  const std::vector<std::vector<T>>& cache() const noexcept { return cache_; }

 private:
  RmsPropOptions options_;
  std::vector<std::vector<T>> cache_;
};

// Standalone update of one value/gradient/cache triple.
template <typename T>
void rmsprop_update(std::span<T> value, std::span<const T> grad, std::span<T> cache,
                    const RmsPropOptions& options);

extern template class RmsProp<float>;
extern template class RmsProp<double>;

// N(0, 1) samples in a (batch, length, channels) tensor; identical for
// identical seeds.
template <typename T>
Tensor<T> sample_normal(const Shape& shape, std::uint64_t seed, double stddev = 1.0);

// Latent prior sample z of shape (batch, length, channels).
template <typename T>
Tensor<T> sample_z(std::size_t batch, std::size_t length, std::size_t channels,
                   std::uint64_t seed) {
  return sample_normal<T>({batch, length, channels}, seed);
}

}  // namespace segan::engine
