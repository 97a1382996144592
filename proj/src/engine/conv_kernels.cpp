// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/conv_kernels.hpp"

#include <algorithm>
#include <vector>

namespace segan::engine {

namespace {

// Filter taps [k_begin, k_end) that land inside the unpadded input for
// output position t.
struct TapRange {
  std::size_t k_begin;
  std::size_t k_end;
  std::ptrdiff_t first_input;  // input index of tap k_begin
};

inline TapRange taps_for(const ConvGeometry& g, std::size_t t) {
  const auto start = static_cast<std::ptrdiff_t>(t * g.stride) -
                     static_cast<std::ptrdiff_t>(g.pad_left);
  const auto width = static_cast<std::ptrdiff_t>(g.width);
  const auto len = static_cast<std::ptrdiff_t>(g.in_len);
  const std::ptrdiff_t kb = std::max<std::ptrdiff_t>(0, -start);
  const std::ptrdiff_t ke = std::clamp<std::ptrdiff_t>(len - start, 0, width);
  if (kb >= ke) return {0, 0, 0};
  return {static_cast<std::size_t>(kb), static_cast<std::size_t>(ke), start + kb};
}

template <typename T>
inline void axpy(T a, const T* __restrict x, T* __restrict y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

ConvGeometry conv_geometry(std::size_t batch, std::size_t in_len,
                           std::size_t in_channels, std::size_t out_channels,
                           std::size_t width, std::size_t stride) {
  ConvGeometry g;
  g.batch = batch;
  g.in_len = in_len;
  g.in_channels = in_channels;
  g.out_channels = out_channels;
  g.width = width;
  g.stride = stride;
  g.out_len = (in_len + stride - 1) / stride;
  const std::size_t span = g.out_len == 0 ? 0 : (g.out_len - 1) * stride + width;
  const std::size_t pad_total = span > in_len ? span - in_len : 0;
  g.pad_left = pad_total / 2;
  return g;
}

template <typename T>
void conv_forward(const ConvGeometry& g, std::span<const T> x,
                  std::span<const T> w, std::span<T> y) {
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* xb = x.data() + b * g.in_len * cin;
    T* yb = y.data() + b * g.out_len * cout;
    for (std::size_t t = 0; t < g.out_len; ++t) {
      const TapRange r = taps_for(g, t);
      T* yrow = yb + t * cout;
      for (std::size_t k = r.k_begin; k < r.k_end; ++k) {
        const T* xrow = xb + (static_cast<std::size_t>(r.first_input) + (k - r.k_begin)) * cin;
        const T* wk = w.data() + k * cin * cout;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          axpy(xrow[ci], wk + ci * cout, yrow, cout);
        }
      }
    }
  }
}

template <typename T>
void conv_backward_data(const ConvGeometry& g, std::span<const T> dy,
                        std::span<const T> w, std::span<T> dx) {
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;
  // (width, out, in) copy keeps the inner loop a contiguous axpy.
  std::vector<T> wt(g.width * cin * cout);
  for (std::size_t k = 0; k < g.width; ++k) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t co = 0; co < cout; ++co) {
        wt[(k * cout + co) * cin + ci] = w[(k * cin + ci) * cout + co];
      }
    }
  }
  for (std::size_t b = 0; b < g.batch; ++b) {
    T* dxb = dx.data() + b * g.in_len * cin;
    const T* dyb = dy.data() + b * g.out_len * cout;
    for (std::size_t t = 0; t < g.out_len; ++t) {
      const TapRange r = taps_for(g, t);
      const T* dyrow = dyb + t * cout;
      for (std::size_t k = r.k_begin; k < r.k_end; ++k) {
        T* dxrow = dxb + (static_cast<std::size_t>(r.first_input) + (k - r.k_begin)) * cin;
        const T* wk = wt.data() + k * cout * cin;
        for (std::size_t co = 0; co < cout; ++co) {
          axpy(dyrow[co], wk + co * cin, dxrow, cin);
        }
      }
    }
  }
}

template <typename T>
void conv_backward_filter(const ConvGeometry& g, std::span<const T> x,
                          std::span<const T> dy, std::span<T> dw) {
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* xb = x.data() + b * g.in_len * cin;
    const T* dyb = dy.data() + b * g.out_len * cout;
    for (std::size_t t = 0; t < g.out_len; ++t) {
      const TapRange r = taps_for(g, t);
      const T* dyrow = dyb + t * cout;
      for (std::size_t k = r.k_begin; k < r.k_end; ++k) {
        const T* xrow = xb + (static_cast<std::size_t>(r.first_input) + (k - r.k_begin)) * cin;
        T* dwk = dw.data() + k * cin * cout;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          axpy(xrow[ci], dyrow, dwk + ci * cout, cout);
        }
      }
    }
  }
}

template void conv_forward<float>(const ConvGeometry&, std::span<const float>,
                                  std::span<const float>, std::span<float>);
template void conv_forward<double>(const ConvGeometry&, std::span<const double>,
                                   std::span<const double>, std::span<double>);
template void conv_backward_data<float>(const ConvGeometry&, std::span<const float>,
                                        std::span<const float>, std::span<float>);
template void conv_backward_data<double>(const ConvGeometry&, std::span<const double>,
                                         std::span<const double>, std::span<double>);
template void conv_backward_filter<float>(const ConvGeometry&, std::span<const float>,
                                          std::span<const float>, std::span<float>);
template void conv_backward_filter<double>(const ConvGeometry&, std::span<const double>,
                                           std::span<const double>, std::span<double>);

}  // namespace segan::engine
