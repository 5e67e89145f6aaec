#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "motiondesk/autograd.hpp"
#include "motiondesk/checkpoint.hpp"
#include "motiondesk/error.hpp"
#include "motiondesk/optim.hpp"
#include "motiondesk/parameter.hpp"
#include "motiondesk/rng.hpp"
#include "motiondesk/tensor.hpp"
#include "test_support.hpp"

using namespace md;
using mdtest::random_tensor;

namespace {

// Naive reference kernels.
std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.size() / m, n = b.dim(1);
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad) {
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const std::size_t OH = (H + 2 * pad - KH) / stride + 1, OW = (W + 2 * pad - KW) / stride + 1;
  std::vector<double> out(N * O * OH * OW);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t oy = 0; oy < OH; ++oy)
        for (std::size_t ox = 0; ox < OW; ++ox) {
          double acc = b[o];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t ky = 0; ky < KH; ++ky)
              for (std::size_t kx = 0; kx < KW; ++kx) {
                const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(H) || ix >= static_cast<long>(W)) continue;
                acc += x[((n * C + c) * H + iy) * W + ix] * w[((o * C + c) * KH + ky) * KW + kx];
              }
          out[((n * O + o) * OH + oy) * OW + ox] = acc;
        }
  return out;
}

void expect_near_all(std::span<const double> got, std::span<const double> want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

// Tape gradient of sum(w * f(x)) wrt x vs central differences.
void check_unary(const std::function<Var(Var)>& f, Tensor x, double tol = 1e-7) {
  Parameter p("x", x);
  {
    Graph g;
    Var y = f(g.param(p));
    Rng r(7);
    g.backward(sum(mul(y, g.constant(random_tensor(y.shape(), r)))));
  }
  const auto scalar = [&](const Tensor& at) {
    Graph g(Trainable::none);
    Var y = f(g.constant(at));
    Rng r(7);
    return sum(mul(y, g.constant(random_tensor(y.shape(), r)))).value().item();
  };
  const auto numeric = mdtest::numeric_gradient(x, scalar);
  expect_near_all(p.value.grad(), numeric, tol);
}

}  // namespace

TEST(Tensor, ShapeAndStorage) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 3u);
  EXPECT_DOUBLE_EQ(t[5], 1.5);
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(t.item(), ShapeError);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.0).item(), 4.0);
}

TEST(Tensor, GradSlotLifecycle) {
  Tensor t({3});
  EXPECT_FALSE(t.has_grad());
  EXPECT_THROW(t.grad(), Error);
  t.ensure_grad()[1] = 2.0;
  t.ensure_grad();
  EXPECT_DOUBLE_EQ(t.grad()[1], 2.0);
  t.zero_grad();
  EXPECT_DOUBLE_EQ(t.grad()[1], 0.0);
  t.clear_grad();
  EXPECT_FALSE(t.has_grad());
}

TEST(Ops, MatmulMatchesNaiveOnOddShapes) {
  Rng rng(1);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {7, 13, 9}, {5, 4, 17}, {12, 3, 8}}) {
    const Tensor a = random_tensor({std::size_t(m), std::size_t(k)}, rng);
    const Tensor b = random_tensor({std::size_t(k), std::size_t(n)}, rng);
    Graph g(Trainable::none);
    const Tensor c = matmul(g.constant(a), g.constant(b)).value();
    expect_near_all(c.data(), naive_matmul(a, b), 1e-12);
  }
}

TEST(Ops, MatmulFlattensLeftOperand) {
  Rng rng(2);
  const Tensor a = random_tensor({3, 2, 2, 2}, rng);
  const Tensor b = random_tensor({8, 4}, rng);
  Graph g(Trainable::none);
  const Tensor c = matmul(g.constant(a), g.constant(b)).value();
  EXPECT_EQ(c.shape(), (Shape{3, 4}));
  expect_near_all(c.data(), naive_matmul(a, b), 1e-12);
  EXPECT_THROW(matmul(g.constant(random_tensor({3, 5}, rng)), g.constant(b)), ShapeError);
}

TEST(Ops, Conv2dMatchesDirectConvolution) {
  Rng rng(3);
  for (auto [stride, pad] : {std::pair{1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
    const Tensor x = random_tensor({2, 3, 7, 6}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    Graph g(Trainable::none);
    const Tensor y = conv2d(g.constant(x), g.constant(w), g.constant(b), stride, pad).value();
    expect_near_all(y.data(), naive_conv(x, w, b, stride, pad), 1e-12);
  }
}

TEST(Ops, MaxPoolPicksWindowMaximum) {
  Tensor x({1, 1, 4, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
  Graph g(Trainable::none);
  const Tensor y = max_pool2d(g.constant(x), 2, 2).value();
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(y.storage(), (std::vector<double>{6, 8, 14, 16}));
}

TEST(Ops, SoftmaxRowsSumToOneEvenForLargeLogits) {
  Rng rng(4);
  Tensor x = random_tensor({6, 5}, rng, -50.0, 50.0);
  x[0] = 800.0;
  Graph g(Trainable::none);
  const Tensor p = softmax(g.constant(x)).value();
  for (std::size_t r = 0; r < 6; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      EXPECT_TRUE(std::isfinite(p[r * 5 + c]));
      s += p[r * 5 + c];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Ops, BroadcastOverLeadingAxis) {
  Graph g(Trainable::none);
  Var a = g.constant(Tensor({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  Var b = g.constant(Tensor({3}, std::vector<double>{10, 20, 30}));
  EXPECT_EQ(add(a, b).value().storage(), (std::vector<double>{11, 22, 33, 14, 25, 36}));
  EXPECT_EQ(sub(a, b).value().storage(), (std::vector<double>{-9, -18, -27, -6, -15, -24}));
  EXPECT_THROW(add(a, g.constant(Tensor({2}))), ShapeError);
}

TEST(Ops, ConcatDistanceAndReductions) {
  Graph g(Trainable::none);
  Var a = g.constant(Tensor({2, 2}, std::vector<double>{3, 0, 1, 1}));
  Var b = g.constant(Tensor({2, 1}, std::vector<double>{7, 8}));
  EXPECT_EQ(concat(a, b).value().storage(), (std::vector<double>{3, 0, 7, 1, 1, 8}));
  Var zero = g.constant(Tensor({2, 2}));
  const Tensor d = distance(a, zero).value();
  EXPECT_DOUBLE_EQ(d[0], 3.0);
  EXPECT_DOUBLE_EQ(d[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(sum(a).value().item(), 5.0);
  EXPECT_DOUBLE_EQ(mean(a).value().item(), 1.25);
  EXPECT_DOUBLE_EQ(log(g.constant(Tensor::scalar(0.0)), 1e-12).value().item(), std::log(1e-12));
}

TEST(Ops, PrimitiveGradientsMatchFiniteDifferences) {
  Rng rng(5);
  check_unary([](Var x) { return sigmoid(x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return tanh(x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return relu(x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return softmax(x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return log(x, 1e-12); }, random_tensor({3, 4}, rng, 0.5, 2.0));
  check_unary([](Var x) { return mul(x, x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return concat(x, tanh(x)); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return mean(x); }, random_tensor({3, 4}, rng));
  check_unary([](Var x) { return scale(x, -2.5); }, random_tensor({3, 4}, rng));
  const Tensor other = random_tensor({3, 4}, rng);
  check_unary([&](Var x) { return distance(x, x.graph().constant(other)); }, random_tensor({3, 4}, rng));
  const Tensor row = random_tensor({4}, rng);
  check_unary([&](Var x) { return add(x, x.graph().constant(row)); }, random_tensor({3, 4}, rng));
  check_unary([&](Var x) { return sub(x.graph().constant(other), x); }, random_tensor({3, 4}, rng));
  const Tensor right = random_tensor({12, 5}, rng);
  check_unary([&](Var x) { return matmul(x, x.graph().constant(right)); }, random_tensor({2, 2, 6}, rng));
  const Tensor left = random_tensor({5, 3}, rng);
  check_unary([&](Var x) { return matmul(x.graph().constant(left), x); }, random_tensor({3, 9}, rng));
  check_unary([](Var x) { return max_pool2d(x, 2, 2); }, random_tensor({2, 2, 4, 6}, rng));
  const Tensor w = random_tensor({3, 2, 3, 3}, rng), bias = random_tensor({3}, rng);
  check_unary([&](Var x) { return conv2d(x, x.graph().constant(w), x.graph().constant(bias), 2, 1); },
              random_tensor({2, 2, 5, 5}, rng));
  const Tensor input = random_tensor({2, 2, 5, 5}, rng);
  check_unary([&](Var x) { return conv2d(x.graph().constant(input), x, x.graph().constant(bias), 1, 1); },
              random_tensor({3, 2, 3, 3}, rng));
  check_unary([&](Var x) { return conv2d(x.graph().constant(input), x.graph().constant(w), x, 1, 0); },
              random_tensor({3}, rng));
}

TEST(Autograd, GradientsAccumulateAcrossBackwardCalls) {
  Parameter p("p", Tensor({2}, std::vector<double>{1.0, -2.0}));
  for (int i = 0; i < 2; ++i) {
    Graph g;
    g.backward(sum(mul(g.param(p), g.param(p))));
  }
  EXPECT_DOUBLE_EQ(p.value.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(p.value.grad()[1], -8.0);
}

TEST(Autograd, NonTrainableParametersAreConstants) {
  Parameter a("a", Tensor({2}, std::vector<double>{1.0, 2.0}));
  Parameter b("b", Tensor({2}, std::vector<double>{3.0, 4.0}));
  Parameter* trainable[] = {&a};
  Graph g{std::span<Parameter* const>(trainable)};
  EXPECT_TRUE(g.is_trainable(a));
  EXPECT_FALSE(g.is_trainable(b));
  g.backward(sum(mul(g.param(a), g.param(b))));
  EXPECT_EQ(std::vector<double>(a.value.grad().begin(), a.value.grad().end()), (std::vector<double>{3.0, 4.0}));
  EXPECT_FALSE(b.value.has_grad());
}

TEST(Autograd, RepeatedParamReturnsSameNode) {
  Parameter a("a", Tensor({1}, std::vector<double>{3.0}));
  Graph g;
  EXPECT_EQ(g.param(a).id(), g.param(a).id());
}

TEST(Optim, ScheduleDecaysInSteps) {
  const LrSchedule s{1e-3, 0.1, 180};
  EXPECT_DOUBLE_EQ(s.rate(0), 1e-3);
  EXPECT_DOUBLE_EQ(s.rate(179), 1e-3);
  EXPECT_DOUBLE_EQ(s.rate(180), 1e-3 * 0.1);
  EXPECT_DOUBLE_EQ(s.rate(360), 1e-3 * 0.1 * 0.1);
  EXPECT_THROW((LrSchedule{0.0, 0.1, 10}.validate()), ConfigError);
  EXPECT_THROW((LrSchedule{1e-3, 1.0, 10}.validate()), ConfigError);
  EXPECT_THROW((LrSchedule{1e-3, 0.5, 0}.validate()), ConfigError);
}

TEST(Optim, AdamMatchesHandComputedSteps) {
  Parameter p("p", Tensor({2}, std::vector<double>{1.0, -1.0}));
  p.adam_m = Tensor({2});
  p.adam_v = Tensor({2});
  const LrSchedule s{0.01, 0.5, 1000};
  const double g1[] = {0.5, -2.0}, g2[] = {0.1, 4.0};
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {1.0, -1.0};
  Parameter* params[] = {&p};
  for (int t = 1; t <= 2; ++t) {
    const double* grad = t == 1 ? g1 : g2;
    p.value.ensure_grad()[0] = grad[0];
    p.value.ensure_grad()[1] = grad[1];
    adam_step(params, s, static_cast<std::uint64_t>(t - 1));
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grad[i];
      v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      x[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.value[i], x[i], 1e-15);
    }
    EXPECT_FALSE(p.value.has_grad());
  }
  EXPECT_THROW(adam_step(params, s, 0), Error);
}

TEST(Parameter, GlorotUniformBounds) {
  Rng rng(6);
  const Tensor w = glorot_uniform({20, 30}, 20, 30, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  double lo = 0, hi = 0;
  for (double x : w.data()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_GE(lo, -bound);
  EXPECT_LE(hi, bound);
  EXPECT_LT(lo, -0.8 * bound);
  EXPECT_GT(hi, 0.8 * bound);
}

TEST(Rng, DeterministicAndStreamSeparated) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
  Rng r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Rng rng(8);
  Parameter a("enc.w", random_tensor({3, 2, 2}, rng)), b("head.b", random_tensor({5}, rng));
  const Parameter* out[] = {&a, &b};
  std::stringstream buf;
  write_checkpoint(buf, out);
  const auto saved = read_checkpoint(buf);
  Parameter a2("enc.w", Tensor({3, 2, 2})), b2("head.b", Tensor({5}));
  Parameter* in[] = {&b2, &a2};
  restore_parameters(saved, in);
  EXPECT_EQ(a2.value, a.value);
  EXPECT_EQ(b2.value, b.value);

  Parameter wrong("head.b", Tensor({4}));
  Parameter* bad[] = {&wrong};
  EXPECT_THROW(restore_parameters(saved, bad), IoError);
  std::stringstream garbage("NOTACKPT\n");
  EXPECT_THROW(read_checkpoint(garbage), IoError);
}
