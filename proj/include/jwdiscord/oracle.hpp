#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "jwdiscord/coefficients.hpp"
#include "jwdiscord/reduction.hpp"

namespace jwd::oracle {

using SparseOp = Eigen::SparseMatrix<double>;

constexpr int kMaxSites = 12;

/// Explicit operators on the 2^N-dimensional Fock space for N <= 12.
///
/// Basis state x has bit j set when site j+1 is spin-up (occupied). Site
/// fermions carry the Jordan-Wigner string, c_j = prod_{i<j}(-2 I_iz) I_j^-.
/// All operators are real; creation operators are transposes.
class FockOperators {
 public:
  explicit FockOperators(SpectralPtr spec);

  int size() const { return n_; }
  int dim() const { return dim_; }
  const SpectralData& spectral() const { return *spec_; }

  const SparseOp& c(int j) const { return c_[j]; }
  const SparseOp& beta(int k) const { return beta_[k]; }
  const SparseOp& number(int k) const { return number_[k]; }  ///< beta_k^+ beta_k
  Eigen::VectorXd iz(int j) const;                             ///< diagonal of I_jz

  /// Sum_k eps_k b+_k b_k - N omega0 / 2, assembled from the mode operators.
  const SparseOp& fermion_hamiltonian() const { return h_fermion_; }
  /// omega0 sum I_iz + D sum (I_ix I_(i+1)x + I_iy I_(i+1)y) from explicit spin matrices.
  const SparseOp& spin_hamiltonian() const { return h_spin_; }

  /// Eigendecomposition of the spin-form Hamiltonian, computed once.
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXd& eigenvectors() const;

  /// max over j,l of the deviations of {c_j, c+_l} - delta and {c_j, c_l}.
  double site_anticommutator_residual() const;
  /// Same for the mode operators.
  double mode_anticommutator_residual() const;
  /// max |I_jz - (c+_j c_j - 1/2)|.
  double number_identity_residual() const;
  /// Sorted spectrum of `h` against the free-fermion multiset.
  double spectrum_residual(const SparseOp& h) const;

 private:
  void diagonalize() const;

  SpectralPtr spec_;
  int n_;
  int dim_;
  std::vector<SparseOp> c_;
  std::vector<SparseOp> beta_;
  std::vector<SparseOp> number_;
  SparseOp h_fermion_;
  SparseOp h_spin_;
  mutable std::once_flag diag_once_;
  mutable Eigen::VectorXd evals_;
  mutable Eigen::MatrixXd evecs_;
};

FockOperators build_operators(SpectralPtr spec);

/// prod_j (1 + 2 I_jz tanh(b_j / 2)) / 2^N.
Eigen::MatrixXd exact_state(const FockOperators& ops, const PolarizationProfile& profile);

/// gamma * prod_{i in sites} I_iz
struct IzTerm {
  double gamma;
  std::vector<Site> sites;
};

/// One term per non-empty site subset with random gamma, scaled so that
/// 1 + sum stays positive.
std::vector<IzTerm> random_iz_terms(int n_sites, std::mt19937_64& gen);

/// (1 + sum of terms) / trace: any state diagonal in the I_z basis.
Eigen::MatrixXd exact_state_diagonal(const FockOperators& ops, const std::vector<IzTerm>& terms);

/// Node j0 polarized with b_j0 plus noise polarization, with the product over
/// the other nodes expanded to `order` in their noise factors, normalized.
/// Built from site occupations directly.
Eigen::MatrixXd exact_noise_state(const FockOperators& ops, Site j0, double b_j0, const NoiseRealization& noise,
                                  int order);

/// exp(-iHt) rho0 exp(iHt).
Eigen::MatrixXcd evolve(const FockOperators& ops, const Eigen::MatrixXd& rho0, double t);

/// Two-mode marginal from correlation functions of an already evolved state:
/// r11 = <(1-N_n)(1-N_m)>, r22 = <N_n(1-N_m)>, r33 = <(1-N_n)N_m>,
/// r44 = <N_n N_m>, r23 = <b+_m b_n>.
XMatrix reduced_from_state(const FockOperators& ops, const Eigen::MatrixXcd& rho_t, Mode n, Mode m);

XMatrix exact_reduced(const FockOperators& ops, const Eigen::MatrixXd& rho0, Mode n, Mode m, double t);

/// Largest entrywise deviation between two X-matrices.
double x_distance(const XMatrix& a, const XMatrix& b);

struct CheckResult {
  std::string name;
  double value;      ///< measured residual
  double tolerance;  ///< pass when value <= tolerance

  bool passed() const { return value <= tolerance; }
};

/// Oracle self-test suites: operator algebra, both Hamiltonian forms,
/// analytic-vs-exact reduced matrices for three-node and noise states, and
/// t-invariance of the discord for random diagonal states.
std::vector<CheckResult> run_self_checks(SpectralPtr spec, std::uint64_t seed);

}  // namespace jwd::oracle
