#pragma once

#include <vector>

#include <Eigen/Core>

#include "emoface/metrics/scorers.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::metrics {

/// Eigenvalues below this are treated as zero when taking matrix roots.
inline constexpr double kFidEigenFloor = 1e-10;

/// Frechet distance between Gaussian fits of two embedding sets (one row
/// per sample, at least two rows each). Symmetric in its arguments and
/// never negative.
double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).
double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& cov_b);

double fid(const std::vector<nn::Tensor>& set_a, const std::vector<nn::Tensor>& set_b,
           const EmbeddingScorer& embedder);

}  // namespace emoface::metrics
