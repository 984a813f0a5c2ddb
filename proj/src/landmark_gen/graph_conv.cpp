#include "emoface/landmark_gen/graph_conv.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::landmark_gen {

using nn::Tensor;
using nn::Var;

GraphOperator GraphOperator::from_adjacency(const std::vector<std::uint8_t>& adjacency, int n) {
  if (adjacency.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw ContractError("adjacency must be n x n");
  }
  GraphOperator g;
  g.n = n;
  g.mask = Matrix<double>::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && adjacency[static_cast<std::size_t>(i * n + j)]) g.mask(i, j) = 1.0;
  g.dinv_sqrt = g.mask.rowwise().sum().cwiseSqrt().cwiseInverse();
  return g;
}

GraphOperator GraphOperator::from_graph(const geometry::FaceGraph& graph) {
  return from_adjacency(graph.adjacency, graph.size());
}

Var graph_conv(const Var& f, const Var& w, const Var& omega, const GraphOperator& g) {
  const auto& fs = f.shape();
  if (fs.size() != 3 || fs[1] != g.n) {
    throw ContractError("graph_conv: features must be [N, " + std::to_string(g.n) + ", d], got " +
                        nn::shape_string(fs));
  }
  if (w.shape().size() != 2 || w.shape()[0] != fs[2]) throw ContractError("graph_conv: weight rows must match d");
  if (omega.shape() != nn::Shape{g.n, g.n}) throw ContractError("graph_conv: omega must be n x n");
  const int batch = fs[0], n = g.n, in = fs[2], out = w.shape()[1];

  using FMat = Matrix<float>;
  using CMap = Eigen::Map<const FMat>;
  using Map = Eigen::Map<FMat>;
  const Eigen::VectorXf d = g.dinv_sqrt.cast<float>();
  const FMat p = d.asDiagonal() * CMap(omega.value().data(), n, n) * d.asDiagonal();
  // Propagate every sample, then apply W to all rows in one product.
  FMat pf(static_cast<Eigen::Index>(batch) * n, in);
  for (int b = 0; b < batch; ++b) {
    pf.middleRows(static_cast<Eigen::Index>(b) * n, n).noalias() =
        p * CMap(f.value().data() + static_cast<std::size_t>(b) * n * in, n, in);
  }
  Tensor result({batch, n, out});
  Map(result.data(), static_cast<Eigen::Index>(batch) * n, out).noalias() = pf * CMap(w.value().data(), in, out);

  FMat mask = g.mask.cast<float>();
  return nn::make_result(std::move(result), {f, w, omega},
                         [p, pf, d, mask, batch, n, in, out](nn::Node& self) {
    const CMap grad(self.grad.data(), static_cast<Eigen::Index>(batch) * n, out);
    const CMap wv(self.parents[1]->value.data(), in, out);
    if (self.parents[1]->requires_grad) {
      Map(self.parents[1]->grad_buffer().data(), in, out).noalias() += pf.transpose() * grad;
    }
    const bool need_f = self.parents[0]->requires_grad, need_omega = self.parents[2]->requires_grad;
    if (!need_f && !need_omega) return;
    const FMat gw = grad * wv.transpose();
    FMat d_p = FMat::Zero(n, n);
    for (int b = 0; b < batch; ++b) {
      const auto gw_b = gw.middleRows(static_cast<Eigen::Index>(b) * n, n);
      if (need_f) {
        Map(self.parents[0]->grad_buffer().data() + static_cast<std::size_t>(b) * n * in, n, in).noalias() +=
            p.transpose() * gw_b;
      }
      if (need_omega) {
        d_p.noalias() += gw_b * CMap(self.parents[0]->value.data() + static_cast<std::size_t>(b) * n * in, n, in)
                                    .transpose();
      }
    }
    if (need_omega) {
      Map(self.parents[2]->grad_buffer().data(), n, n) += (d.asDiagonal() * d_p * d.asDiagonal()).cwiseProduct(mask);
    }
  });
}

Var graph_pool(const Var& x, const geometry::RegionPartition& partition) {
  const auto& s = x.shape();
  if (s.size() != 3) throw ContractError("graph_pool: expected [N, n, d]");
  const int batch = s[0], n = s[1], dim = s[2];
  geometry::validate_partition(partition, n);
  const int k = geometry::kNumRegions;
  Tensor out({batch, k, dim});
  for (int b = 0; b < batch; ++b) {
    for (int r = 0; r < k; ++r) {
      const auto& members = partition.regions[static_cast<std::size_t>(r)];
      const float size = static_cast<float>(members.size());
      float* dst = out.data() + (static_cast<std::size_t>(b) * k + r) * dim;
      for (int v : members) {
        const float* src = x.value().data() + (static_cast<std::size_t>(b) * n + v) * dim;
        for (int c = 0; c < dim; ++c) dst[c] += src[c];
      }
      for (int c = 0; c < dim; ++c) dst[c] /= size;
    }
  }
  return nn::make_result(std::move(out), {x}, [partition, batch, n, dim, k](nn::Node& self) {
    if (!self.parents[0]->requires_grad) return;
    float* gx = self.parents[0]->grad_buffer().data();
    for (int b = 0; b < batch; ++b) {
      for (int r = 0; r < k; ++r) {
        const auto& members = partition.regions[static_cast<std::size_t>(r)];
        const float size = static_cast<float>(members.size());
        const float* g = self.grad.data() + (static_cast<std::size_t>(b) * k + r) * dim;
        for (int v : members) {
          float* dst = gx + (static_cast<std::size_t>(b) * n + v) * dim;
          for (int c = 0; c < dim; ++c) dst[c] += g[c] / size;
        }
      }
    }
  });
}

Var graph_unpool(const Var& x, const geometry::RegionPartition& partition, int num_vertices) {
  const auto& s = x.shape();
  const int k = geometry::kNumRegions;
  if (s.size() != 3 || s[1] != k) throw ContractError("graph_unpool: expected [N, 8, d]");
  geometry::validate_partition(partition, num_vertices);
  const int batch = s[0], dim = s[2], n = num_vertices;
  const auto region = partition.region_of();
  Tensor out({batch, n, dim});
  for (int b = 0; b < batch; ++b) {
    for (int v = 0; v < n; ++v) {
      const float* src = x.value().data() + (static_cast<std::size_t>(b) * k + region[static_cast<std::size_t>(v)]) * dim;
      std::copy(src, src + dim, out.data() + (static_cast<std::size_t>(b) * n + v) * dim);
    }
  }
  return nn::make_result(std::move(out), {x}, [region, batch, n, dim, k](nn::Node& self) {
    if (!self.parents[0]->requires_grad) return;
    float* gx = self.parents[0]->grad_buffer().data();
    for (int b = 0; b < batch; ++b) {
      for (int v = 0; v < n; ++v) {
        const float* g = self.grad.data() + (static_cast<std::size_t>(b) * n + v) * dim;
        float* dst = gx + (static_cast<std::size_t>(b) * k + region[static_cast<std::size_t>(v)]) * dim;
        for (int c = 0; c < dim; ++c) dst[c] += g[c];
      }
    }
  });
}

GraphConvLayer::GraphConvLayer(nn::ParameterSet& params, const std::string& name, const GraphOperator& g, int in,
                               int out, Activation act, nn::Rng& rng, nn::Init init)
    : graph_(std::make_shared<const GraphOperator>(g)), act_(act) {
  Tensor w({in, out});
  if (init == nn::Init::kUniformFanIn) {
    const double bound = std::sqrt(6.0 / (in + out));
    for (auto& v : w.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  }
  weight_ = params.add(name + ".weight", std::move(w));
  // softplus(log(e - 1)) = 1
  omega_raw_ = params.add(name + ".omega", Tensor({g.n, g.n}, static_cast<float>(std::log(std::exp(1.0) - 1.0))));
  Tensor mask({g.n, g.n});
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) mask.at(i, j) = static_cast<float>(g.mask(i, j));
  mask_ = nn::constant(std::move(mask));
}

Var GraphConvLayer::omega() const { return nn::mul(nn::softplus(omega_raw_), mask_); }

Var GraphConvLayer::operator()(const Var& f) const {
  Var z = graph_conv(f, weight_, omega(), *graph_);
  return act_ == Activation::kLeakyRelu ? nn::leaky_relu(z) : z;
}

}  // namespace emoface::landmark_gen
