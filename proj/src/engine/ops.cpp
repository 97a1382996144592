// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "engine/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "engine/conv_kernels.hpp"

namespace segan::engine {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kShapeMismatch, what);
}

template <typename T>
void require_rank3(const Tensor<T>& t, const char* op) {
  require(t.rank() == 3, std::string(op) + ": expected (batch, length, channels), got " +
                             shape_string(t.shape()));
}

template <typename T>
void add_bias(Tensor<T>& y, const Tensor<T>& bias) {
  const std::size_t c = bias.size();
  for (std::size_t i = 0; i < y.size(); i += c) {
    for (std::size_t k = 0; k < c; ++k) y[i + k] += bias[k];
  }
}

template <typename T>
void accumulate_bias_grad(const Tensor<T>& dy, Tensor<T>& db) {
  const std::size_t c = db.size();
  for (std::size_t i = 0; i < dy.size(); i += c) {
    for (std::size_t k = 0; k < c; ++k) db[k] += dy[i + k];
  }
}

}  // namespace

template <typename T>
VbnReference<T> reference_stats(const Tensor<T>& x) {
  require_rank3(x, "reference_stats");
  const std::size_t c = x.dim(2);
  const std::size_t n = x.dim(0) * x.dim(1);
  require(n > 0, "reference_stats: empty reference batch");
  std::vector<double> mean(c, 0.0), sq(c, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    mean[i % c] += v;
    sq[i % c] += v * v;
  }
  VbnReference<T> ref;
  ref.mean = Tensor<T>({c});
  ref.var = Tensor<T>({c});
  for (std::size_t k = 0; k < c; ++k) {
    const double m = mean[k] / n;
    ref.mean[k] = static_cast<T>(m);
    ref.var[k] = static_cast<T>(std::max(sq[k] / n - m * m, 0.0));
  }
  ref.count = static_cast<double>(x.dim(0));
  return ref;
}

template <typename T>
Var conv1d(Graph<T>& g, Var x, Var w, Var b, std::size_t stride) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(w);
  require_rank3(xv, "conv1d");
  require(wv.rank() == 3 && wv.dim(1) == xv.dim(2),
          "conv1d: filter " + shape_string(wv.shape()) + " does not match input " +
              shape_string(xv.shape()));
  require(stride >= 1 && xv.dim(1) >= 1, "conv1d: need stride >= 1 and length >= 1");
  const ConvGeometry geo =
      conv_geometry(xv.dim(0), xv.dim(1), xv.dim(2), wv.dim(2), wv.dim(0), stride);
  Tensor<T> y({geo.batch, geo.out_len, geo.out_channels});
  if (b.valid()) {
    require(g.value(b).size() == geo.out_channels, "conv1d: bias size mismatch");
    add_bias(y, g.value(b));
  }
  conv_forward<T>(geo, xv.data(), wv.data(), y.data());
  return g.record(std::move(y), {x, w, b}, [x, w, b, geo](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(x)) {
      conv_backward_data<T>(geo, dy.data(), gr.value(w).data(), gr.grad_buffer(x).data());
    }
    if (gr.requires_grad(w)) {
      conv_backward_filter<T>(geo, gr.value(x).data(), dy.data(), gr.grad_buffer(w).data());
    }
    if (b.valid() && gr.requires_grad(b)) accumulate_bias_grad(dy, gr.grad_buffer(b));
  });
}

template <typename T>
Var conv1d_transpose(Graph<T>& g, Var y, Var w, Var b, std::size_t stride) {
  const Tensor<T>& yv = g.value(y);
  const Tensor<T>& wv = g.value(w);
  require_rank3(yv, "conv1d_transpose");
  require(wv.rank() == 3 && wv.dim(2) == yv.dim(2),
          "conv1d_transpose: filter " + shape_string(wv.shape()) +
              " does not match input " + shape_string(yv.shape()));
  require(stride >= 1, "conv1d_transpose: stride must be >= 1");
  // Geometry of the forward convolution this operation is the adjoint of.
  const ConvGeometry geo = conv_geometry(yv.dim(0), yv.dim(1) * stride, wv.dim(1),
                                         wv.dim(2), wv.dim(0), stride);
  Tensor<T> out({geo.batch, geo.in_len, geo.in_channels});
  if (b.valid()) {
    require(g.value(b).size() == geo.in_channels, "conv1d_transpose: bias size mismatch");
    add_bias(out, g.value(b));
  }
  conv_backward_data<T>(geo, yv.data(), wv.data(), out.data());
  return g.record(std::move(out), {y, w, b}, [y, w, b, geo](Graph<T>& gr, Var self) {
    const Tensor<T>& dout = gr.grad(self);
    if (gr.requires_grad(y)) {
      conv_forward<T>(geo, dout.data(), gr.value(w).data(), gr.grad_buffer(y).data());
    }
    if (gr.requires_grad(w)) {
      conv_backward_filter<T>(geo, dout.data(), gr.value(y).data(), gr.grad_buffer(w).data());
    }
    if (b.valid() && gr.requires_grad(b)) accumulate_bias_grad(dout, gr.grad_buffer(b));
  });
}

template <typename T>
Var prelu(Graph<T>& g, Var x, Var a) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& av = g.value(a);
  const std::size_t c = av.size();
  require(xv.rank() >= 1 && c == xv.shape().back(), "prelu: slope count must equal channels");
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    y[i] = xv[i] > T{0} ? xv[i] : av[i % c] * xv[i];
  }
  return g.record(std::move(y), {x, a}, [x, a, c](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& xv = gr.value(x);
    const Tensor<T>& av = gr.value(a);
    if (gr.requires_grad(x)) {
      Tensor<T>& dx = gr.grad_buffer(x);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        dx[i] += xv[i] > T{0} ? dy[i] : av[i % c] * dy[i];
      }
    }
    if (gr.requires_grad(a)) {
      Tensor<T>& da = gr.grad_buffer(a);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        if (!(xv[i] > T{0})) da[i % c] += dy[i] * xv[i];
      }
    }
  });
}

template <typename T>
Var leaky_relu(Graph<T>& g, Var x, T alpha) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > T{0} ? xv[i] : alpha * xv[i];
  return g.record(std::move(y), {x}, [x, alpha](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& xv = gr.value(x);
    Tensor<T>& dx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += xv[i] > T{0} ? dy[i] : alpha * dy[i];
  });
}

template <typename T>
Var tanh_act(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = std::tanh(xv[i]);
  return g.record(std::move(y), {x}, [x](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& yv = gr.value(self);
    Tensor<T>& dx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (T{1} - yv[i] * yv[i]);
  });
}

template <typename T>
Var virtual_batch_norm(Graph<T>& g, Var x, const VbnReference<T>& ref, Var gamma,
                       Var beta, double eps) {
  if (!ref.ready()) {
    fail(ErrorCode::kMissingRefBatch, "virtual batch norm used before a reference batch was set");
  }
  const Tensor<T>& xv = g.value(x);
  require_rank3(xv, "virtual_batch_norm");
  const std::size_t B = xv.dim(0), L = xv.dim(1), C = xv.dim(2);
  require(ref.mean.size() == C && ref.var.size() == C && g.value(gamma).size() == C &&
              g.value(beta).size() == C,
          "virtual_batch_norm: per-channel parameter size mismatch");
  const double w_x = 1.0 / (ref.count + 1.0);
  const double w_r = 1.0 - w_x;

  // Per (example, channel): combined mean and 1/sqrt(var + eps).
  std::vector<double> mu(B * C), inv(B * C);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      double s = 0.0, q = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double v = xv.at(b, l, c);
        s += v;
        q += v * v;
      }
      const double rm = ref.mean[c];
      const double m = w_r * rm + w_x * s / L;
      const double sq = w_r * (static_cast<double>(ref.var[c]) + rm * rm) + w_x * q / L;
      mu[b * C + c] = m;
      inv[b * C + c] = 1.0 / std::sqrt(std::max(sq - m * m, 0.0) + eps);
    }
  }
  const Tensor<T>& gv = g.value(gamma);
  const Tensor<T>& bv = g.value(beta);
  Tensor<T> y(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t c = 0; c < C; ++c) {
        const double xhat = (xv.at(b, l, c) - mu[b * C + c]) * inv[b * C + c];
        y.at(b, l, c) = static_cast<T>(gv[c] * xhat + bv[c]);
      }
    }
  }
  return g.record(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, mu = std::move(mu), inv = std::move(inv), w_x, B, L, C](
          Graph<T>& gr, Var self) {
        const Tensor<T>& dy = gr.grad(self);
        const Tensor<T>& xv = gr.value(x);
        const Tensor<T>& gv = gr.value(gamma);
        Tensor<T>* dx = gr.requires_grad(x) ? &gr.grad_buffer(x) : nullptr;
        Tensor<T>* dg = gr.requires_grad(gamma) ? &gr.grad_buffer(gamma) : nullptr;
        Tensor<T>* db = gr.requires_grad(beta) ? &gr.grad_buffer(beta) : nullptr;
        const double wl = w_x / static_cast<double>(L);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t c = 0; c < C; ++c) {
            const double m = mu[b * C + c];
            const double iv = inv[b * C + c];
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
              const double d = dy.at(b, l, c);
              sum_dy += d;
              sum_dy_xhat += d * (xv.at(b, l, c) - m) * iv;
            }
            const double sum_dxhat = gv[c] * sum_dy;
            const double sum_dxhat_xhat = gv[c] * sum_dy_xhat;
            if (dg) (*dg)[c] += static_cast<T>(sum_dy_xhat);
            if (db) (*db)[c] += static_cast<T>(sum_dy);
            if (dx) {
              for (std::size_t l = 0; l < L; ++l) {
                const double xhat = (xv.at(b, l, c) - m) * iv;
                const double dxhat = dy.at(b, l, c) * gv[c];
                dx->at(b, l, c) +=
                    static_cast<T>(iv * (dxhat - wl * sum_dxhat - wl * xhat * sum_dxhat_xhat));
              }
            }
          }
        }
      });
}

template <typename T>
Var concat_channels(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  require_rank3(av, "concat_channels");
  require_rank3(bv, "concat_channels");
  require(av.dim(0) == bv.dim(0) && av.dim(1) == bv.dim(1),
          "concat_channels: cannot concatenate " + shape_string(av.shape()) + " and " +
              shape_string(bv.shape()));
  const std::size_t rows = av.dim(0) * av.dim(1);
  const std::size_t ca = av.dim(2), cb = bv.dim(2);
  Tensor<T> y({av.dim(0), av.dim(1), ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().data() + r * ca, ca, y.data().data() + r * (ca + cb));
    std::copy_n(bv.data().data() + r * cb, cb, y.data().data() + r * (ca + cb) + ca);
  }
  return g.record(std::move(y), {a, b}, [a, b, rows, ca, cb](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(a)) {
      Tensor<T>& da = gr.grad_buffer(a);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < ca; ++k) da[r * ca + k] += dy[r * (ca + cb) + k];
    }
    if (gr.requires_grad(b)) {
      Tensor<T>& db = gr.grad_buffer(b);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < cb; ++k) db[r * cb + k] += dy[r * (ca + cb) + ca + k];
    }
  });
}

template <typename T>
Var linear(Graph<T>& g, Var x, Var w, Var b) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& wv = g.value(w);
  require(xv.rank() >= 1 && xv.dim(0) > 0, "linear: empty input");
  const std::size_t B = xv.dim(0);
  const std::size_t N = xv.size() / B;
  require(wv.rank() == 2 && wv.dim(0) == N,
          "linear: weight " + shape_string(wv.shape()) + " does not match " +
              std::to_string(N) + " input features");
  const std::size_t M = wv.dim(1);
  Tensor<T> y({B, M});
  if (b.valid()) {
    require(g.value(b).size() == M, "linear: bias size mismatch");
    add_bias(y, g.value(b));
  }
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t m = 0; m < M; ++m) y[i * M + m] += xv[i * N + n] * wv[n * M + m];
  return g.record(std::move(y), {x, w, b}, [x, w, b, B, N, M](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& xv = gr.value(x);
    const Tensor<T>& wv = gr.value(w);
    if (gr.requires_grad(x)) {
      Tensor<T>& dx = gr.grad_buffer(x);
      for (std::size_t i = 0; i < B; ++i)
        for (std::size_t n = 0; n < N; ++n)
          for (std::size_t m = 0; m < M; ++m) dx[i * N + n] += dy[i * M + m] * wv[n * M + m];
    }
    if (gr.requires_grad(w)) {
      Tensor<T>& dw = gr.grad_buffer(w);
      for (std::size_t i = 0; i < B; ++i)
        for (std::size_t n = 0; n < N; ++n)
          for (std::size_t m = 0; m < M; ++m) dw[n * M + m] += xv[i * N + n] * dy[i * M + m];
    }
    if (b.valid() && gr.requires_grad(b)) accumulate_bias_grad(dy, gr.grad_buffer(b));
  });
}

template <typename T>
Var l1_loss(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  require(av.shape() == bv.shape(), "l1_loss: shape mismatch " + shape_string(av.shape()) +
                                        " vs " + shape_string(bv.shape()));
  require(!av.empty(), "l1_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(static_cast<double>(av[i]) - bv[i]);
  Tensor<T> out({1}, static_cast<T>(acc / av.size()));
  return g.record(std::move(out), {a, b}, [a, b](Graph<T>& gr, Var self) {
    const Tensor<T>& av = gr.value(a);
    const Tensor<T>& bv = gr.value(b);
    const T scale = gr.grad(self)[0] / static_cast<T>(av.size());
    Tensor<T>* da = gr.requires_grad(a) ? &gr.grad_buffer(a) : nullptr;
    Tensor<T>* db = gr.requires_grad(b) ? &gr.grad_buffer(b) : nullptr;
    for (std::size_t i = 0; i < av.size(); ++i) {
      const T s = av[i] > bv[i] ? scale : (av[i] < bv[i] ? -scale : T{0});
      if (da) (*da)[i] += s;
      if (db) (*db)[i] -= s;
    }
  });
}

template <typename T>
Var lsq_loss(Graph<T>& g, Var d, T target) {
  const Tensor<T>& dv = g.value(d);
  require(!dv.empty(), "lsq_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < dv.size(); ++i) {
    const double e = static_cast<double>(dv[i]) - target;
    acc += e * e;
  }
  Tensor<T> out({1}, static_cast<T>(0.5 * acc / dv.size()));
  return g.record(std::move(out), {d}, [d, target](Graph<T>& gr, Var self) {
    const Tensor<T>& dv = gr.value(d);
    const T scale = gr.grad(self)[0] / static_cast<T>(dv.size());
    Tensor<T>& dd = gr.grad_buffer(d);
    for (std::size_t i = 0; i < dv.size(); ++i) dd[i] += scale * (dv[i] - target);
  });
}

template <typename T>
Var sum(Graph<T>& g, Var x) {
  const Tensor<T>& xv = g.value(x);
  double acc = 0.0;
  for (T v : xv.data()) acc += v;
  return g.record(Tensor<T>({1}, static_cast<T>(acc)), {x}, [x](Graph<T>& gr, Var self) {
    const T s = gr.grad(self)[0];
    for (T& v : gr.grad_buffer(x).data()) v += s;
  });
}

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  require(av.shape() == bv.shape(), "add: shape mismatch");
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return g.record(std::move(y), {a, b}, [a, b](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    for (Var v : {a, b}) {
      if (!gr.requires_grad(v)) continue;
      Tensor<T>& dv = gr.grad_buffer(v);
      for (std::size_t i = 0; i < dy.size(); ++i) dv[i] += dy[i];
    }
  });
}

template <typename T>
Var scale(Graph<T>& g, Var x, T factor) {
  const Tensor<T>& xv = g.value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = factor * xv[i];
  return g.record(std::move(y), {x}, [x, factor](Graph<T>& gr, Var self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += factor * dy[i];
  });
}

template <typename T>
Var dot_const(Graph<T>& g, Var x, const Tensor<T>& weights) {
  const Tensor<T>& xv = g.value(x);
  require(xv.size() == weights.size(), "dot_const: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += static_cast<double>(xv[i]) * weights[i];
  return g.record(Tensor<T>({1}, static_cast<T>(acc)), {x},
                  [x, weights](Graph<T>& gr, Var self) {
                    const T s = gr.grad(self)[0];
                    Tensor<T>& dx = gr.grad_buffer(x);
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += s * weights[i];
                  });
}

#define SEGAN_INSTANTIATE_OPS(T)                                                  \
  template VbnReference<T> reference_stats<T>(const Tensor<T>&);                  \
  template Var conv1d<T>(Graph<T>&, Var, Var, Var, std::size_t);                  \
  template Var conv1d_transpose<T>(Graph<T>&, Var, Var, Var, std::size_t);        \
  template Var prelu<T>(Graph<T>&, Var, Var);                                     \
  template Var leaky_relu<T>(Graph<T>&, Var, T);                                  \
  template Var tanh_act<T>(Graph<T>&, Var);                                       \
  template Var virtual_batch_norm<T>(Graph<T>&, Var, const VbnReference<T>&, Var, \
                                     Var, double);                                \
  template Var concat_channels<T>(Graph<T>&, Var, Var);                           \
  template Var linear<T>(Graph<T>&, Var, Var, Var);                               \
  template Var l1_loss<T>(Graph<T>&, Var, Var);                                   \
  template Var lsq_loss<T>(Graph<T>&, Var, T);                                    \
  template Var sum<T>(Graph<T>&, Var);                                            \
  template Var add<T>(Graph<T>&, Var, Var);                                       \
  template Var scale<T>(Graph<T>&, Var, T);                                       \
  template Var dot_const<T>(Graph<T>&, Var, const Tensor<T>&);

SEGAN_INSTANTIATE_OPS(float)
SEGAN_INSTANTIATE_OPS(double)

#undef SEGAN_INSTANTIATE_OPS

}  // namespace segan::engine
