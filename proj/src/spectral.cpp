#include "jwdiscord/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jwd {

void ChainConfig::validate() const {
  if (n_sites < 2)
    throw std::invalid_argument("chain length must be at least 2, got " + std::to_string(n_sites));
  if (coupling == 0.0 || !std::isfinite(coupling))
    throw std::invalid_argument("coupling constant must be finite and non-zero");
  if (!std::isfinite(omega0)) throw std::invalid_argument("Larmor frequency must be finite");
}

SpectralData::SpectralData(const ChainConfig& config) : config_(config) {
  config_.validate();
  const int n = config_.n_sites;
  const double norm = std::sqrt(2.0 / (n + 1));
  k_.resize(n);
  eps_.resize(n);
  g_.resize(n, n);
  for (int a = 0; a < n; ++a) {
    k_[a] = std::numbers::pi * (a + 1) / (n + 1);
    eps_[a] = config_.coupling * std::cos(k_[a]) + config_.omega0;
    // Reduce the phase n*j modulo 2(N+1) so that g is exactly symmetric.
    for (int j = 0; j < n; ++j) {
      const int phase = ((a + 1) * (j + 1)) % (2 * (n + 1));
      g_(a, j) = norm * std::sin(std::numbers::pi * phase / (n + 1));
    }
  }
}

SpectralPtr build_spectral(const ChainConfig& config) {
  return std::make_shared<const SpectralData>(config);
}

double orthogonality_residual(const SpectralData& spec) {
  const Eigen::MatrixXd& g = spec.transform();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(g.rows(), g.cols());
  const double rows = (g * g.transpose() - id).cwiseAbs().maxCoeff();
  const double cols = (g.transpose() * g - id).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

}  // namespace jwd
