#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "motiondesk/autograd.hpp"
#include "motiondesk/clip.hpp"
#include "motiondesk/image.hpp"
#include "motiondesk/nets.hpp"
#include "motiondesk/parameter.hpp"
#include "motiondesk/rng.hpp"

namespace mdtest {

// Small enough for exhaustive gradient checks, deep enough to exercise
// every layer: 8x8 input, 2 and 3 conv channels.
inline md::NetDims tiny_dims(std::size_t classes = 3, std::size_t motion_classes = 4) {
  return md::NetDims{8, 2, 3, 6, 5, classes, motion_classes};
}

inline md::GrayImage random_image(std::size_t size, md::Rng& rng) {
  md::GrayImage img(size, size);
  for (double& p : img.pixels) p = rng.uniform();
  return img;
}

inline md::VideoClip random_clip(std::size_t frames, std::size_t size, md::Rng& rng, std::size_t id,
                                 std::optional<std::size_t> label = std::nullopt) {
  md::VideoClip clip;
  clip.video_id = id;
  clip.pseudo_label = label;
  for (std::size_t t = 0; t < frames; ++t) clip.frames.push_back(random_image(size, rng));
  return clip;
}

inline md::Tensor random_tensor(md::Shape shape, md::Rng& rng, double lo = -1.0, double hi = 1.0) {
  md::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t nonzero = 0;  // coordinates with a non-negligible gradient
  std::size_t kinks = 0;    // draws skipped because a relu or max-pool switch lies within +-h
};

// Relative error with the denominator floored so that coordinates whose
// true gradient is (numerically) zero are judged on absolute error.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central differences on `coords` coordinates drawn uniformly from the
/// concatenation of params, against the tape's gradient. Gradients smaller
/// than the one whose roundoff error eps*|f|/h would already be 1e-4 of it
/// are judged on absolute error at that floor. A relu or max-pool switch
/// within +-h shifts the central difference by half the gap between the two
/// one-sided slopes, so a draw whose slopes differ by more than twice the
/// tolerance is no usable reference; it is counted in `kinks` and redrawn.
inline GradCheck check_gradients(std::span<md::Parameter* const> params, const std::function<md::Var(md::Graph&)>& loss,
                                 std::size_t coords, md::Rng& rng, double h = 1e-5, double tolerance = 1e-4) {
  for (md::Parameter* p : params) p->value.clear_grad();
  double base = 0.0;
  {
    md::Graph g{params};
    md::Var l = loss(g);
    base = l.value().item();
    g.backward(l);
  }
  std::vector<std::vector<double>> analytic;
  std::size_t total = 0;
  for (md::Parameter* p : params) {
    if (p->value.has_grad()) {
      analytic.emplace_back(p->value.grad().begin(), p->value.grad().end());
    } else {
      analytic.emplace_back(p->value.size(), 0.0);
    }
    p->value.clear_grad();
    total += p->value.size();
  }
  auto eval = [&] {
    md::Graph g(md::Trainable::none);
    return loss(g).value().item();
  };

  const double floor = std::max(1e-6, std::numeric_limits<double>::epsilon() * std::abs(base) / (h * tolerance));
  GradCheck out;
  while (out.checked < coords && out.kinks < coords) {
    std::size_t flat = rng.below(total), which = 0;
    while (flat >= params[which]->value.size()) flat -= params[which++]->value.size();
    double& x = params[which]->value[flat];
    const double saved = x;
    x = saved + h;
    const double up = eval();
    x = saved - h;
    const double down = eval();
    x = saved;
    const double forward = (up - base) / h, backward = (base - down) / h;
    if (relative_error(forward, backward, floor) > 2.0 * tolerance) {
      ++out.kinks;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[which][flat];
    out.max_rel_error = std::max(out.max_rel_error, relative_error(a, numeric, floor));
    out.nonzero += std::abs(a) > 1e-6;
    ++out.checked;
  }
  return out;
}

// Gradient of a scalar function of one input tensor, by central differences
// on every coordinate.
inline std::vector<double> numeric_gradient(md::Tensor x, const std::function<double(const md::Tensor&)>& f,
                                            double h = 1e-6) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

inline std::vector<double> snapshot(std::span<const md::Parameter* const> params) {
  std::vector<double> out;
  for (const md::Parameter* p : params) out.insert(out.end(), p->value.data().begin(), p->value.data().end());
  return out;
}

}  // namespace mdtest
