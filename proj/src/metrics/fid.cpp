#include "emoface/metrics/fid.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "emoface/errors.hpp"

namespace emoface::metrics {

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = ev[i] < kFidEigenFloor ? 0.0 : std::sqrt(ev[i]);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Tr((A B)^(1/2)) = Tr((A^(1/2) B A^(1/2))^(1/2)) for PSD A, B.
double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ra = psd_sqrt(a);
  const Eigen::MatrixXd inner = ra * b * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  double t = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()[i];
    if (v >= kFidEigenFloor) t += std::sqrt(v);
  }
  return t;
}

void moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
  if (x.rows() < 2) throw ContractError("fid: need at least two samples per set");
  mu = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - mu.transpose();
  cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

}  // namespace

double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& cov_b) {
  if (mu_a.size() != mu_b.size() || cov_a.rows() != mu_a.size() || cov_b.rows() != mu_b.size()) {
    throw ContractError("fid: embedding dimensions differ");
  }
  // Both orderings are averaged so swapping the sets is exact.
  const double cross = 0.5 * (trace_sqrt_product(cov_a, cov_b) + trace_sqrt_product(cov_b, cov_a));
  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * cross;
  return std::max(0.0, d);
}

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ContractError("fid: embedding dimensions differ");
  Eigen::VectorXd mu_a, mu_b;
  Eigen::MatrixXd cov_a, cov_b;
  moments(a, mu_a, cov_a);
  moments(b, mu_b, cov_b);
  return frechet_distance(mu_a, cov_a, mu_b, cov_b);
}

double fid(const std::vector<nn::Tensor>& set_a, const std::vector<nn::Tensor>& set_b,
           const EmbeddingScorer& embedder) {
  auto embed_all = [&](const std::vector<nn::Tensor>& set) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(set.size()), embedder.dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto e = embedder.embed(set[i]);
      for (int j = 0; j < embedder.dim(); ++j) m(static_cast<Eigen::Index>(i), j) = e[static_cast<std::size_t>(j)];
    }
    return m;
  };
  return frechet_distance(embed_all(set_a), embed_all(set_b));
}

}  // namespace emoface::metrics
