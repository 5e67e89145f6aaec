#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "motiondesk/autograd.hpp"
#include "motiondesk/error.hpp"

namespace md {
namespace {

[[noreturn]] void mismatch(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

void same_graph(const std::string& op, Var a, Var b) {
  if (&a.graph() != &b.graph()) throw Error(op + ": operands belong to different graphs");
}

// True when b broadcasts over a's leading axis, false when shapes are equal.
bool binary_broadcast(const std::string& op, const Shape& a, const Shape& b) {
  if (a == b) return false;
  if (a.size() == b.size() + 1 && std::equal(a.begin() + 1, a.end(), b.begin())) return true;
  mismatch(op, a, b);
}

template <typename Forward, typename GradA, typename GradB>
Var elementwise_binary(const std::string& op, Var a, Var b, Forward forward, GradA grad_a,
                       GradB grad_b) {
  same_graph(op, a, b);
  Graph& g = a.graph();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  binary_broadcast(op, av.shape(), bv.shape());
  const std::size_t n = av.size();
  const std::size_t m = bv.size();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < n; ++i) out[i] = forward(av[i], bv[i % m]);
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, n, m, grad_a, grad_b](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    const Tensor& av = g.value(ia);
    const Tensor& bv = g.value(ib);
    if (g.requires_grad(ia)) {
      auto da = g.grad_buffer(ia);
      for (std::size_t i = 0; i < n; ++i) da[i] += grad_a(dout[i], av[i], bv[i % m]);
    }
    if (g.requires_grad(ib)) {
      auto db = g.grad_buffer(ib);
      for (std::size_t i = 0; i < n; ++i) db[i % m] += grad_b(dout[i], av[i], bv[i % m]);
    }
  });
}

template <typename Forward, typename Derivative>
Var elementwise_unary(Var x, Forward forward, Derivative derivative) {
  Graph& g = x.graph();
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = forward(xv[i]);
  const std::size_t ix = x.id();
  return g.record(std::move(out), {ix}, [ix, derivative](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    const Tensor& xv = g.value(ix);
    const Tensor& yv = g.value(self);
    auto dx = g.grad_buffer(ix);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dout[i] * derivative(xv[i], yv[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// C[i0 .. i0+MR) x [j0 .. j0+NR) += A . B, accumulating each entry over p in
// order from zero so every blocking of the same product agrees bitwise.
template <std::size_t MR, std::size_t NR>
void gemm_block(std::size_t i0, std::size_t j0, std::size_t n, std::size_t k, const double* A, const double* B,
                double* C) {
  double acc[MR][NR] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const double* b = B + p * n + j0;
    for (std::size_t r = 0; r < MR; ++r) {
      const double a = A[(i0 + r) * k + p];
      for (std::size_t c = 0; c < NR; ++c) acc[r][c] += a * b[c];
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t c = 0; c < NR; ++c) C[(i0 + r) * n + j0 + c] += acc[r][c];
  }
}

template <std::size_t MR>
void gemm_rows(std::size_t i0, std::size_t n, std::size_t k, const double* A, const double* B, double* C) {
  constexpr std::size_t NR = 8;
  std::size_t j = 0;
  for (; j + NR <= n; j += NR) gemm_block<MR, NR>(i0, j, n, k, A, B, C);
  for (; j < n; ++j) gemm_block<MR, 1>(i0, j, n, k, A, B, C);
}

// C[m x n] += A[m x k] . B[k x n], all row-major.
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* A, const double* B, double* C) {
  constexpr std::size_t MR = 4;
  std::size_t i = 0;
  for (; i + MR <= m; i += MR) gemm_rows<MR>(i, n, k, A, B, C);
  for (; i < m; ++i) gemm_rows<1>(i, n, k, A, B, C);
}

std::vector<double> transposed(const double* src, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  }
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise_binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double d, double, double) { return d; }, [](double d, double, double) { return d; });
}

Var sub(Var a, Var b) {
  return elementwise_binary(
      "subtract", a, b, [](double x, double y) { return x - y; },
      [](double d, double, double) { return d; }, [](double d, double, double) { return -d; });
}

Var mul(Var a, Var b) {
  return elementwise_binary(
      "multiply", a, b, [](double x, double y) { return x * y; },
      [](double d, double, double y) { return d * y; },
      [](double d, double x, double) { return d * x; });
}

Var matmul(Var a, Var b) {
  same_graph("matmul", a, b);
  Graph& g = a.graph();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() < 2 || bv.rank() != 2) mismatch("matmul", av.shape(), bv.shape());
  const std::size_t rows = av.dim(0);
  const std::size_t inner = av.size() / rows;
  if (inner != bv.dim(0)) mismatch("matmul", av.shape(), bv.shape());
  const std::size_t cols = bv.dim(1);

  Tensor out({rows, cols});
  gemm(rows, cols, inner, av.data().data(), bv.data().data(), out.data().data());

  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, rows, inner, cols](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    if (g.requires_grad(ia)) {
      const std::vector<double> bt = transposed(g.value(ib).data().data(), inner, cols);
      gemm(rows, inner, cols, dout.data(), bt.data(), g.grad_buffer(ia).data());
    }
    if (g.requires_grad(ib)) {
      const std::vector<double> at = transposed(g.value(ia).data().data(), rows, inner);
      gemm(inner, cols, rows, at.data(), dout.data(), g.grad_buffer(ib).data());
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_channels, kh, kw, stride, padding;
  std::size_t out_h, out_w;
  std::size_t patch() const { return channels * kh * kw; }
  std::size_t positions() const { return out_h * out_w; }
};

// col[k, p] with k = (c, ky, kx), p = (oy, ox); zero outside the padded image.
void im2col(const ConvGeometry& geo, const double* image, double* col) {
  const std::size_t positions = geo.positions();
  for (std::size_t c = 0; c < geo.channels; ++c) {
    for (std::size_t ky = 0; ky < geo.kh; ++ky) {
      for (std::size_t kx = 0; kx < geo.kw; ++kx) {
        double* row = col + ((c * geo.kh + ky) * geo.kw + kx) * positions;
        for (std::size_t oy = 0; oy < geo.out_h; ++oy) {
          const long iy = static_cast<long>(oy * geo.stride + ky) - static_cast<long>(geo.padding);
          double* dst = row + oy * geo.out_w;
          if (iy < 0 || iy >= static_cast<long>(geo.height)) {
            std::fill(dst, dst + geo.out_w, 0.0);
            continue;
          }
          const double* src = image + (c * geo.height + static_cast<std::size_t>(iy)) * geo.width;
          for (std::size_t ox = 0; ox < geo.out_w; ++ox) {
            const long ix = static_cast<long>(ox * geo.stride + kx) - static_cast<long>(geo.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(geo.width)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& geo, const double* col, double* image) {
  const std::size_t positions = geo.positions();
  for (std::size_t c = 0; c < geo.channels; ++c) {
    for (std::size_t ky = 0; ky < geo.kh; ++ky) {
      for (std::size_t kx = 0; kx < geo.kw; ++kx) {
        const double* row = col + ((c * geo.kh + ky) * geo.kw + kx) * positions;
        for (std::size_t oy = 0; oy < geo.out_h; ++oy) {
          const long iy = static_cast<long>(oy * geo.stride + ky) - static_cast<long>(geo.padding);
          if (iy < 0 || iy >= static_cast<long>(geo.height)) continue;
          double* dst = image + (c * geo.height + static_cast<std::size_t>(iy)) * geo.width;
          for (std::size_t ox = 0; ox < geo.out_w; ++ox) {
            const long ix = static_cast<long>(ox * geo.stride + kx) - static_cast<long>(geo.padding);
            if (ix < 0 || ix >= static_cast<long>(geo.width)) continue;
            dst[ix] += row[oy * geo.out_w + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var input, Var weight, Var bias, std::size_t stride, std::size_t padding) {
  same_graph("conv2d", input, weight);
  same_graph("conv2d", input, bias);
  Graph& g = input.graph();
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  if (x.rank() != 4 || w.rank() != 4 || x.dim(1) != w.dim(1)) mismatch("conv2d", x.shape(), w.shape());
  if (b.rank() != 1 || b.dim(0) != w.dim(0)) mismatch("conv2d", w.shape(), b.shape());
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");

  ConvGeometry geo{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), stride, padding, 0, 0};
  if (geo.height + 2 * padding < geo.kh || geo.width + 2 * padding < geo.kw) {
    mismatch("conv2d", x.shape(), w.shape());
  }
  geo.out_h = (geo.height + 2 * padding - geo.kh) / stride + 1;
  geo.out_w = (geo.width + 2 * padding - geo.kw) / stride + 1;

  const std::size_t K = geo.patch();
  const std::size_t P = geo.positions();
  const bool keep_cols = g.requires_grad(weight.id());
  auto cols = std::make_shared<std::vector<double>>(keep_cols ? geo.batch * K * P : K * P);

  Tensor out({geo.batch, geo.out_channels, geo.out_h, geo.out_w});
  const double* W = w.data().data();
  for (std::size_t n = 0; n < geo.batch; ++n) {
    double* col = cols->data() + (keep_cols ? n * K * P : 0);
    im2col(geo, x.data().data() + n * geo.channels * geo.height * geo.width, col);
    double* dst = out.data().data() + n * geo.out_channels * P;
    for (std::size_t o = 0; o < geo.out_channels; ++o) std::fill(dst + o * P, dst + (o + 1) * P, b[o]);
    gemm(geo.out_channels, P, K, W, col, dst);
  }
  if (!keep_cols) cols.reset();

  const std::size_t ix = input.id(), iw = weight.id(), ib = bias.id();
  return g.record(std::move(out), {ix, iw, ib}, [geo, cols, ix, iw, ib](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    const std::size_t K = geo.patch();
    const std::size_t P = geo.positions();
    if (g.requires_grad(ib)) {
      auto db = g.grad_buffer(ib);
      for (std::size_t n = 0; n < geo.batch; ++n) {
        for (std::size_t o = 0; o < geo.out_channels; ++o) {
          const double* d = dout.data() + (n * geo.out_channels + o) * P;
          double acc = 0.0;
          #pragma omp simd reduction(+ : acc)
          for (std::size_t p = 0; p < P; ++p) acc += d[p];
          db[o] += acc;
        }
      }
    }
    if (g.requires_grad(iw)) {
      auto dw = g.grad_buffer(iw);
      for (std::size_t n = 0; n < geo.batch; ++n) {
        const std::vector<double> col_t = transposed(cols->data() + n * K * P, K, P);
        gemm(geo.out_channels, K, P, dout.data() + n * geo.out_channels * P, col_t.data(), dw.data());
      }
    }
    if (g.requires_grad(ix)) {
      auto dx = g.grad_buffer(ix);
      const std::vector<double> w_t = transposed(g.value(iw).data().data(), geo.out_channels, K);
      std::vector<double> dcol(K * P);
      for (std::size_t n = 0; n < geo.batch; ++n) {
        std::fill(dcol.begin(), dcol.end(), 0.0);
        gemm(K, P, geo.out_channels, w_t.data(), dout.data() + n * geo.out_channels * P, dcol.data());
        col2im_add(geo, dcol.data(), dx.data() + n * geo.channels * geo.height * geo.width);
      }
    }
  });
}

Var max_pool2d(Var input, std::size_t window, std::size_t stride) {
  Graph& g = input.graph();
  const Tensor& x = input.value();
  if (x.rank() != 4) throw ShapeError("max_pool2d: expected rank-4 input, got " + shape_string(x.shape()));
  if (window == 0 || stride == 0 || x.dim(2) < window || x.dim(3) < window) {
    throw ShapeError("max_pool2d: window " + std::to_string(window) + " does not fit input " +
                     shape_string(x.shape()));
  }
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t H = x.dim(2), W = x.dim(3);
  const std::size_t oh = (H - window) / stride + 1, ow = (W - window) / stride + 1;
  Tensor out({x.dim(0), x.dim(1), oh, ow});
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.size());
  for (std::size_t plane = 0; plane < planes; ++plane) {
    const double* src = x.data().data() + plane * H * W;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * stride) * W + ox * stride;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx = (oy * stride + dy) * W + ox * stride + dx;
            if (src[idx] > src[best]) best = idx;
          }
        }
        const std::size_t o = (plane * oh + oy) * ow + ox;
        out[o] = src[best];
        (*argmax)[o] = static_cast<std::uint32_t>(plane * H * W + best);
      }
    }
  }
  const std::size_t ix = input.id();
  return g.record(std::move(out), {ix}, [ix, argmax](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    auto dx = g.grad_buffer(ix);
    for (std::size_t o = 0; o < dout.size(); ++o) dx[(*argmax)[o]] += dout[o];
  });
}

Var concat(Var a, Var b) {
  same_graph("concatenate", a, b);
  Graph& g = a.graph();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != bv.rank() || !std::equal(av.shape().begin(), av.shape().end() - 1, bv.shape().begin())) {
    mismatch("concatenate", av.shape(), bv.shape());
  }
  const std::size_t m = av.shape().back(), n = bv.shape().back();
  const std::size_t rows = av.size() / m;
  Shape shape = av.shape();
  shape.back() = m + n;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().data() + r * m, m, out.data().data() + r * (m + n));
    std::copy_n(bv.data().data() + r * n, n, out.data().data() + r * (m + n) + m);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, rows, m, n](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    if (g.requires_grad(ia)) {
      auto da = g.grad_buffer(ia);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < m; ++j) da[r * m + j] += dout[r * (m + n) + j];
    }
    if (g.requires_grad(ib)) {
      auto db = g.grad_buffer(ib);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < n; ++j) db[r * n + j] += dout[r * (m + n) + m + j];
    }
  });
}

Var sigmoid(Var x) {
  return elementwise_unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return elementwise_unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var x) {
  return elementwise_unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var log(Var x, double floor) {
  return elementwise_unary(
      x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v >= floor && v > 0.0 ? 1.0 / v : 0.0; });
}

Var softmax(Var x) {
  Graph& g = x.graph();
  const Tensor& xv = x.value();
  const std::size_t width = xv.shape().back();
  const std::size_t rows = xv.size() / width;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = xv.data().data() + r * width;
    double* dst = out.data().data() + r * width;
    const double top = *std::max_element(src, src + width);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      dst[j] = std::exp(src[j] - top);
      total += dst[j];
    }
    for (std::size_t j = 0; j < width; ++j) dst[j] /= total;
  }
  const std::size_t ix = x.id();
  return g.record(std::move(out), {ix}, [ix, rows, width](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    const Tensor& y = g.value(self);
    auto dx = g.grad_buffer(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += dout[r * width + j] * y[r * width + j];
      for (std::size_t j = 0; j < width; ++j) dx[r * width + j] += y[r * width + j] * (dout[r * width + j] - dot);
    }
  });
}

Var sum(Var x) {
  Graph& g = x.graph();
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t ix = x.id();
  return g.record(Tensor::scalar(total), {ix}, [ix](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    for (double& v : g.grad_buffer(ix)) v += d;
  });
}

Var mean(Var x) {
  Graph& g = x.graph();
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t n = x.value().size();
  const std::size_t ix = x.id();
  return g.record(Tensor::scalar(total / static_cast<double>(n)), {ix}, [ix, n](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0] / static_cast<double>(n);
    for (double& v : g.grad_buffer(ix)) v += d;
  });
}

Var distance(Var a, Var b) {
  same_graph("distance", a, b);
  Graph& g = a.graph();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) mismatch("distance", av.shape(), bv.shape());
  const std::size_t width = av.shape().back();
  const std::size_t rows = av.size() / width;
  Shape shape(av.shape().begin(), av.shape().end() - 1);
  if (shape.empty()) shape = {1};
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double diff = av[r * width + j] - bv[r * width + j];
      acc += diff * diff;
    }
    out[r] = std::sqrt(acc);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, rows, width](Graph& g, std::size_t self) {
    auto dout = g.grad(self);
    const Tensor& d = g.value(self);
    const Tensor& av = g.value(ia);
    const Tensor& bv = g.value(ib);
    const bool ga = g.requires_grad(ia), gb = g.requires_grad(ib);
    std::span<double> da, db;
    if (ga) da = g.grad_buffer(ia);
    if (gb) db = g.grad_buffer(ib);
    for (std::size_t r = 0; r < rows; ++r) {
      if (d[r] == 0.0) continue;
      const double coef = dout[r] / d[r];
      for (std::size_t j = 0; j < width; ++j) {
        const double diff = (av[r * width + j] - bv[r * width + j]) * coef;
        if (ga) da[r * width + j] += diff;
        if (gb) db[r * width + j] -= diff;
      }
    }
  });
}

Var filled_like(Var x, double value) { return x.graph().constant(Tensor(x.shape(), value)); }

Var scale(Var x, double factor) { return mul(x, filled_like(x, factor)); }

}  // namespace md
