// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common/error.hpp"

namespace segan::engine {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape);

// Dense row-major array. Activations use the (batch, length, channels)
// layout, so channels are the fastest-moving index.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      fail(ErrorCode::kShapeMismatch, "data size " + std::to_string(data_.size()) +
                                          " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 accessor for (batch, length, channels) tensors.
  T& at(std::size_t b, std::size_t l, std::size_t c) {
    return data_[(b * shape_[1] + l) * shape_[2] + c];
  }
  const T& at(std::size_t b, std::size_t l, std::size_t c) const {
    return data_[(b * shape_[1] + l) * shape_[2] + c];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

// A named trainable tensor and its accumulated gradient. A parameter that is
// not trainable enters graphs as a constant and never receives gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;

  void zero_grad() {
    if (grad.shape() != value.shape()) {
      grad = Tensor<T>(value.shape());
    } else {
      grad.fill(T{0});
    }
  }
};

// Ordered parameter collection. Layers refer to entries by index so models
// remain copyable.
template <typename T>
class ParameterStore {
 public:
  std::size_t add(std::string name, Tensor<T> value) {
    if (find(name) != npos) {
      fail(ErrorCode::kInternal, "duplicate parameter name " + name);
    }
    // Gradients are allocated by the first backward sweep that reaches them.
    params_.push_back(Parameter<T>{std::move(name), std::move(value), {}, true});
    return params_.size() - 1;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t find(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return i;
    }
    return npos;
  }

  Parameter<T>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return params_[i]; }
  Parameter<T>& at(const std::string& name) {
    const std::size_t i = find(name);
    if (i == npos) fail(ErrorCode::kInvalidArgument, "no parameter named " + name);
    return params_[i];
  }
  std::size_t size() const noexcept { return params_.size(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (auto& p : params_) {
      if (!p.grad.empty()) p.grad.fill(T{0});
    }
  }
  void set_trainable(bool on) {
    for (auto& p : params_) p.trainable = on;
  }
  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

 private:
  std::vector<Parameter<T>> params_;
};

}  // namespace segan::engine
