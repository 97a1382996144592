// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>

namespace segan::engine {

// Geometry of a strided 1-D cross-correlation over (batch, length, channels)
// data with a (width, in_channels, out_channels) filter bank. Padding follows
// the "same" rule: out_len = ceil(in_len / stride) and the total zero padding
// max((out_len - 1) * stride + width - in_len, 0) is split floor/ceil between
// the left and right ends.
struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_len = 0;
  std::size_t in_channels = 0;
  std::size_t out_len = 0;
  std::size_t out_channels = 0;
  std::size_t width = 0;
  std::size_t stride = 1;
  std::size_t pad_left = 0;
};

ConvGeometry conv_geometry(std::size_t batch, std::size_t in_len,
                           std::size_t in_channels, std::size_t out_channels,
                           std::size_t width, std::size_t stride);

// y += conv(x, w)
template <typename T>
void conv_forward(const ConvGeometry& g, std::span<const T> x,
                  std::span<const T> w, std::span<T> y);

// dx += conv^T(dy, w); also the forward pass of the transposed convolution.
template <typename T>
void conv_backward_data(const ConvGeometry& g, std::span<const T> dy,
                        std::span<const T> w, std::span<T> dx);

// dw += d<conv(x, w), dy>/dw
template <typename T>
void conv_backward_filter(const ConvGeometry& g, std::span<const T> x,
                          std::span<const T> dy, std::span<T> dw);

}  // namespace segan::engine
