#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace jwd {

/// Lattice site of the spin chain, 1-based.
struct Site {
  int index;
};

/// Eigenmode fermion (wavenumber k_n = pi n / (N+1)), 1-based.
struct Mode {
  int index;
};

/// Open XY chain of N spin-1/2 nodes with uniform coupling D and Larmor
/// frequency omega0, in dimensionless units.
struct ChainConfig {
  int n_sites = 17;
  double coupling = 1.0;
  double omega0 = 0.0;

  void validate() const;
};

/// Free-fermion diagonalization of the chain: dispersion and the real
/// orthogonal sine transform between site fermions c_j and mode fermions
/// beta_k = sum_j g_k(j) c_j.
///
/// Storage is 0-based: `g(n, j)` holds g_{k_{n+1}}(j+1).
class SpectralData {
 public:
  explicit SpectralData(const ChainConfig& config);

  int size() const { return config_.n_sites; }
  const ChainConfig& config() const { return config_; }

  double wavenumber(int n) const { return k_[n]; }
  double energy(int n) const { return eps_[n]; }
  double g(int n, int j) const { return g_(n, j); }

  const std::vector<double>& wavenumbers() const { return k_; }
  const std::vector<double>& energies() const { return eps_; }
  const Eigen::MatrixXd& transform() const { return g_; }

  // Test hook: lets the orthogonality checker be exercised on a corrupted
  // transform.
  Eigen::MatrixXd& mutable_transform_for_testing() { return g_; }

 private:
  ChainConfig config_;
  std::vector<double> k_;
  std::vector<double> eps_;
  Eigen::MatrixXd g_;
};

using SpectralPtr = std::shared_ptr<const SpectralData>;

SpectralPtr build_spectral(const ChainConfig& config);

/// max |sum_k g_k(j) g_k(l) - delta_jl| over both index orders.
double orthogonality_residual(const SpectralData& spec);

}  // namespace jwd
