#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emoface/geometry/face_graph.hpp"
#include "emoface/nn/layers.hpp"

namespace emoface::landmark_gen {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fixed topology of a graph convolution: the A+I support mask and the
/// inverse square-root degrees of the unweighted A+I.
struct GraphOperator {
  int n = 0;
  Matrix<double> mask;  // A + I, entries 0/1
  Eigen::VectorXd dinv_sqrt;

  /// `adjacency` is row-major n x n, symmetric, zero diagonal.
  static GraphOperator from_adjacency(const std::vector<std::uint8_t>& adjacency, int n);
  static GraphOperator from_graph(const geometry::FaceGraph& graph);
};

/// Z = D^-1/2 omega D^-1/2 F W for one sample. `omega` must already be zero
/// outside the mask.
template <class S>
Matrix<S> graph_conv_linear(const Matrix<S>& omega, const GraphOperator& g, const Matrix<S>& f, const Matrix<S>& w) {
  const auto d = g.dinv_sqrt.cast<S>();
  const Matrix<S> p = d.asDiagonal() * omega * d.asDiagonal();
  return p * f * w;
}

template <class S>
struct GraphConvGradients {
  Matrix<S> d_f, d_w, d_omega;
};

/// Gradients of <G, Z> for Z = graph_conv_linear(omega, g, f, w). d_omega is
/// exactly zero outside the mask.
template <class S>
GraphConvGradients<S> graph_conv_linear_backward(const Matrix<S>& omega, const GraphOperator& g, const Matrix<S>& f,
                                                 const Matrix<S>& w, const Matrix<S>& grad_out) {
  const auto d = g.dinv_sqrt.cast<S>();
  const Matrix<S> p = d.asDiagonal() * omega * d.asDiagonal();
  const Matrix<S> pf = p * f;
  GraphConvGradients<S> out;
  out.d_w = pf.transpose() * grad_out;
  const Matrix<S> gw = grad_out * w.transpose();
  out.d_f = p.transpose() * gw;
  const Matrix<S> d_p = gw * f.transpose();
  out.d_omega = (d.asDiagonal() * d_p * d.asDiagonal()).cwiseProduct(g.mask.cast<S>());
  return out;
}

/// Batched op: f [N, n, in], w [in, out], omega [n, n] -> [N, n, out]
/// (no activation). Throws ContractError on shape mismatch.
nn::Var graph_conv(const nn::Var& f, const nn::Var& w, const nn::Var& omega, const GraphOperator& g);

/// Per-region mean: [N, 68, d] -> [N, 8, d].
nn::Var graph_pool(const nn::Var& x, const geometry::RegionPartition& partition);
/// Broadcast of region features to member vertices: [N, 8, d] -> [N, n, d].
nn::Var graph_unpool(const nn::Var& x, const geometry::RegionPartition& partition, int num_vertices);

enum class Activation { kIdentity, kLeakyRelu };

/// One propagation layer with learnable non-negative edge weights
/// omega = softplus(raw) restricted to the A+I support, initialized to 1.
class GraphConvLayer {
 public:
  GraphConvLayer() = default;
  GraphConvLayer(nn::ParameterSet& params, const std::string& name, const GraphOperator& g, int in, int out,
                 Activation act, nn::Rng& rng, nn::Init init = nn::Init::kUniformFanIn);

  nn::Var operator()(const nn::Var& f) const;
  /// Masked edge weights currently in effect.
  nn::Var omega() const;
  const nn::Var& weight() const { return weight_; }
  const nn::Var& omega_raw() const { return omega_raw_; }
  const GraphOperator& graph() const { return *graph_; }

 private:
  std::shared_ptr<const GraphOperator> graph_;
  nn::Var weight_, omega_raw_, mask_;
  Activation act_ = Activation::kIdentity;
};

}  // namespace emoface::landmark_gen
