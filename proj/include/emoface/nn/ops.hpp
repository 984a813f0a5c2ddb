#pragma once

#include <vector>

#include "emoface/nn/autograd.hpp"

// Differentiable operations over Var. Layout conventions:
//   images         [N, C, H, W]
//   graph features [N, V, D]
//   sequences      [T, B, F]

namespace emoface::nn {

// Elementwise (operands must have identical shapes).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_scalar(const Var& a, float s);
Var square(const Var& a);

Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var relu(const Var& x);
Var leaky_relu(const Var& x, float slope = 0.2f);
Var softplus(const Var& x);

/// Adds `bias` [C] along dimension 1 of x [N, C, ...].
Var add_bias(const Var& x, const Var& bias);

/// [M, K] x [K, N].
Var matmul(const Var& a, const Var& b);
/// x [N, in] * w [in, out] + b [out]; `b` may be undefined.
Var linear(const Var& x, const Var& w, const Var& b);

Var reshape(const Var& x, Shape shape);
Var concat(const std::vector<Var>& xs, int dim);
Var slice(const Var& x, int dim, int start, int length);

/// [N, C] -> [N, C, H, W] by spatial replication.
Var broadcast_spatial(const Var& x, int height, int width);
/// [N, D] -> [N, K, D] by replication along a new node axis.
Var broadcast_nodes(const Var& x, int count);
/// [N, K, D] -> [N, D], mean over the node axis.
Var mean_nodes(const Var& x);

/// 2-D cross-correlation, weight [O, C, k, k], bias [O] (may be undefined).
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding);

Var upsample_nearest2x(const Var& x);
/// Bilinear resampling with half-pixel centers (align_corners = false).
Var resize_bilinear(const Var& x, int height, int width);
Var avg_pool2x(const Var& x);
Var max_pool2x(const Var& x);

/// Per-(sample, channel) spatial statistics of x [N, C, H, W] -> [N, C].
Var channel_mean(const Var& x);
Var channel_std(const Var& x, float eps = 1e-5f);
Var instance_normalize(const Var& x, float eps = 1e-5f);
/// y = x * scale[n, c] + shift[n, c].
Var scale_shift_channels(const Var& x, const Var& scale, const Var& shift);

/// x [N, C, H, W] scaled per pixel by gate [N, 1, H, W].
Var mul_channels(const Var& x, const Var& gate);

/// Bilinear backward warp. flow [N, 2, H, W] holds (dx, dy) offsets in
/// normalized [-1, 1] image coordinates (half-pixel centers), so one pixel
/// is 2/W horizontally. Out-of-range samples read the border.
Var grid_warp(const Var& x, const Var& flow);

Var sum(const Var& x);
Var mean(const Var& x);
/// mean |a - b|
Var l1_loss(const Var& a, const Var& b);
/// mean (a - b)^2
Var mse_loss(const Var& a, const Var& b);

/// One LSTM layer over x [T, B, I] starting from zero state.
/// w_ih [I, 4H], w_hh [H, 4H], bias [4H]; gate order (i, f, g, o).
/// Returns the hidden states [T, B, H].
Var lstm(const Var& x, const Var& w_ih, const Var& w_hh, const Var& bias);

}  // namespace emoface::nn
