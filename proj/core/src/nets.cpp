#include "motiondesk/nets.hpp"

#include <algorithm>

#include "motiondesk/error.hpp"
#include "motiondesk/rng.hpp"

namespace md {

void NetDims::validate() const {
  if (image_size < 4 || image_size % 4 != 0) {
    throw ConfigError("image_size must be a positive multiple of 4, got " + std::to_string(image_size));
  }
  if (conv1_channels == 0 || conv2_channels == 0 || visual_dim == 0 || motion_dim == 0) {
    throw ConfigError("network widths must be positive");
  }
  if (classes == 0 || motion_classes == 0) throw ConfigError("class counts must be positive");
}

namespace {

Parameter weight(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return Parameter(name, glorot_uniform(shape, fan_in, fan_out, rng));
}

Parameter zeros(const std::string& name, std::size_t n) { return Parameter(name, Tensor({n}, 0.0)); }

HeadParams make_head(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return HeadParams{
      weight(prefix + ".fc1.weight", {in, hidden}, in, hidden, rng),
      zeros(prefix + ".fc1.bias", hidden),
      weight(prefix + ".fc2.weight", {hidden, out}, hidden, out, rng),
      zeros(prefix + ".fc2.bias", out),
  };
}

}  // namespace

ModelBundle ModelBundle::create(const NetDims& dims, std::uint64_t seed) {
  dims.validate();
  Rng rng(seed);
  ModelBundle m;
  m.dims = dims;
  const std::size_t c1 = dims.conv1_channels, c2 = dims.conv2_channels;
  const std::size_t pooled = dims.image_size / 4;
  const std::size_t flat = c2 * pooled * pooled;
  const std::size_t dv = dims.visual_dim, dm = dims.motion_dim;
  m.theta_n = EncoderParams{
      weight("theta_n.conv1.weight", {c1, 1, 3, 3}, 9, c1 * 9, rng),
      zeros("theta_n.conv1.bias", c1),
      weight("theta_n.conv2.weight", {c2, c1, 3, 3}, c1 * 9, c2 * 9, rng),
      zeros("theta_n.conv2.bias", c2),
      weight("theta_n.fc.weight", {flat, dv}, flat, dv, rng),
      zeros("theta_n.fc.bias", dv),
  };
  m.theta_c = make_head("theta_c", dv, dv, dims.classes, rng);
  m.theta_g = GruParams{
      weight("theta_g.update.weight", {dm + dv, dm}, dm + dv, dm, rng),
      zeros("theta_g.update.bias", dm),
      weight("theta_g.reset.weight", {dm + dv, dm}, dm + dv, dm, rng),
      zeros("theta_g.reset.bias", dm),
      weight("theta_g.candidate.weight", {dm + dv, dm}, dm + dv, dm, rng),
      zeros("theta_g.candidate.bias", dm),
  };
  m.theta_m = make_head("theta_m", dm, std::min<std::size_t>(512, 8 * dims.motion_classes), dims.motion_classes, rng);
  m.theta_a = make_head("theta_a", dv + dm, dv + dm, dims.classes, rng);
  m.theta_o = make_head("theta_o", dm, dm, dims.classes, rng);
  return m;
}

std::vector<Parameter*> ModelBundle::params(std::initializer_list<ParamGroup> groups) {
  std::vector<Parameter*> out;
  for (ParamGroup group : groups) {
    std::vector<Parameter*> part;
    switch (group) {
      case ParamGroup::encoder: part = theta_n.all(); break;
      case ParamGroup::visual_head: part = theta_c.all(); break;
      case ParamGroup::gru: part = theta_g.all(); break;
      case ParamGroup::motion_head: part = theta_m.all(); break;
      case ParamGroup::fusion_head: part = theta_a.all(); break;
      case ParamGroup::motion_only_head: part = theta_o.all(); break;
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<Parameter*> ModelBundle::all_params() {
  return params({ParamGroup::encoder, ParamGroup::visual_head, ParamGroup::gru, ParamGroup::motion_head,
                 ParamGroup::fusion_head, ParamGroup::motion_only_head});
}

std::vector<const Parameter*> ModelBundle::all_params() const {
  auto mutable_params = const_cast<ModelBundle*>(this)->all_params();
  return {mutable_params.begin(), mutable_params.end()};
}

Var image_batch(Graph& g, std::span<const GrayImage* const> images, std::size_t size) {
  if (images.empty()) throw ShapeError("image_batch: no images");
  Tensor batch({images.size(), 1, size, size});
  for (std::size_t i = 0; i < images.size(); ++i) {
    const GrayImage& img = *images[i];
    if (img.width != size || img.height != size) {
      throw ShapeError("encode: image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                       ", encoder expects " + std::to_string(size) + "x" + std::to_string(size));
    }
    std::copy(img.pixels.begin(), img.pixels.end(), batch.data().begin() + static_cast<long>(i * size * size));
  }
  return g.constant(std::move(batch));
}

Var encode(Graph& g, EncoderParams& theta, Var images) {
  const Shape& s = images.shape();
  const std::size_t flat = theta.fc_w.value.dim(0);
  const std::size_t c2 = theta.conv2_w.value.dim(0);
  if (s.size() != 4 || s[1] != 1 || s[2] != s[3] || c2 * (s[2] / 4) * (s[3] / 4) != flat || s[2] % 4 != 0) {
    throw ShapeError("encode: input " + shape_string(s) + " does not match encoder configuration");
  }
  Var h = relu(conv2d(images, g.param(theta.conv1_w), g.param(theta.conv1_b), 1, 1));
  h = max_pool2d(h, 2, 2);
  h = relu(conv2d(h, g.param(theta.conv2_w), g.param(theta.conv2_b), 1, 1));
  h = max_pool2d(h, 2, 2);
  return relu(add(matmul(h, g.param(theta.fc_w)), g.param(theta.fc_b)));
}

Var gru_step(Graph& g, GruParams& theta, Var prev_state, Var input) {
  const std::size_t dm = theta.w_z.value.dim(1);
  const std::size_t dv = theta.w_z.value.dim(0) - dm;
  const Shape& s = prev_state.shape();
  const Shape& x = input.shape();
  if (s.size() != 2 || x.size() != 2 || s[1] != dm || x[1] != dv || s[0] != x[0]) {
    throw ShapeError("gru_step: state " + shape_string(s) + " / input " + shape_string(x) +
                     " do not match cell with state " + std::to_string(dm) + ", input " + std::to_string(dv));
  }
  Var state_input = concat(prev_state, input);
  Var z = sigmoid(add(matmul(state_input, g.param(theta.w_z)), g.param(theta.b_z)));
  Var r = sigmoid(add(matmul(state_input, g.param(theta.w_r)), g.param(theta.b_r)));
  Var candidate = tanh(add(matmul(concat(mul(r, prev_state), input), g.param(theta.w_h)), g.param(theta.b_h)));
  return add(mul(sub(filled_like(z, 1.0), z), prev_state), mul(z, candidate));
}

Var motion_feature_video(Graph& g, GruParams& theta, std::span<const Var> features) {
  if (features.empty()) throw ShapeError("motion_feature_video: no frame features");
  const std::size_t dm = theta.w_z.value.dim(1);
  Var state = g.constant(Tensor({features.front().shape().at(0), dm}, 0.0));
  for (Var feature : features) state = gru_step(g, theta, state, feature);
  return state;
}

Var motion_feature_image(Graph& g, GruParams& theta, Var feature) {
  return motion_feature_video(g, theta, std::span<const Var>(&feature, 1));
}

Var classify(Graph& g, HeadParams& head, Var feature) {
  const Shape& s = feature.shape();
  if (s.size() != 2 || s[1] != head.input_width()) {
    throw ShapeError("classify: feature " + shape_string(s) + " does not match head input width " +
                     std::to_string(head.input_width()));
  }
  Var hidden = relu(add(matmul(feature, g.param(head.fc1_w)), g.param(head.fc1_b)));
  return softmax(add(matmul(hidden, g.param(head.fc2_w)), g.param(head.fc2_b)));
}

}  // namespace md
