#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "motiondesk/autograd.hpp"
#include "motiondesk/image.hpp"

namespace md {

struct NetDims {
  std::size_t image_size = 32;  // square grayscale input
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;
  std::size_t visual_dim = 64;  // d_v
  std::size_t motion_dim = 32;  // d_m
  std::size_t classes = 6;      // C
  std::size_t motion_classes = 16;  // K

  void validate() const;
};

// conv(3x3) -> relu -> pool2 -> conv(3x3) -> relu -> pool2 -> fc -> relu
struct EncoderParams {
  Parameter conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b;
  std::vector<Parameter*> all() { return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc_w, &fc_b}; }
};

// Update/reset/candidate transforms over the concatenation [state, input].
struct GruParams {
  Parameter w_z, b_z, w_r, b_r, w_h, b_h;
  std::vector<Parameter*> all() { return {&w_z, &b_z, &w_r, &b_r, &w_h, &b_h}; }
};

// fc -> relu -> fc -> softmax
struct HeadParams {
  Parameter fc1_w, fc1_b, fc2_w, fc2_b;
  std::vector<Parameter*> all() { return {&fc1_w, &fc1_b, &fc2_w, &fc2_b}; }
  std::size_t input_width() const { return fc1_w.value.dim(0); }
};

enum class ParamGroup {
  encoder,           // theta_n
  visual_head,       // theta_c
  gru,               // theta_g
  motion_head,       // theta_m
  fusion_head,       // theta_a
  motion_only_head,  // theta_o, used by the only-MR ablation
};

/// All learnable parameters. Holds Parameters by value, so it must stay put
/// while any Graph built over it is alive.
struct ModelBundle {
  NetDims dims;
  EncoderParams theta_n;
  HeadParams theta_c;
  GruParams theta_g;
  HeadParams theta_m;
  HeadParams theta_a;
  HeadParams theta_o;

  // Weights Glorot-uniform from a generator seeded with seed, biases zero.
  static ModelBundle create(const NetDims& dims, std::uint64_t seed);

  std::vector<Parameter*> params(std::initializer_list<ParamGroup> groups);
  std::vector<Parameter*> all_params();
  std::vector<const Parameter*> all_params() const;
};

// images -> [batch, 1, size, size] constant; all images must be size x size.
Var image_batch(Graph& g, std::span<const GrayImage* const> images, std::size_t size);

Var encode(Graph& g, EncoderParams& theta, Var images);
Var gru_step(Graph& g, GruParams& theta, Var prev_state, Var input);
// Folds gru_step over per-timestep features [batch, d_v] from the zero state.
Var motion_feature_video(Graph& g, GruParams& theta, std::span<const Var> features);
// One gru_step from the zero state.
Var motion_feature_image(Graph& g, GruParams& theta, Var feature);
// Class probabilities [batch, classes].
Var classify(Graph& g, HeadParams& head, Var feature);

}  // namespace md
