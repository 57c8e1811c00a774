#include "qhgeo/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace qhgeo {
namespace {

GaussRule build_rule(int order) {
  // Jacobi matrix of the Legendre recurrence; eigenvalues are the nodes on
  // [-1, 1] and the squared first eigenvector components give the weights.
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  GaussRule rule;
  rule.nodes = 0.5 * (eig.eigenvalues().array() + 1.0);
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 64) throw std::invalid_argument("Gauss-Legendre order must be in [1, 64]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

}  // namespace qhgeo
