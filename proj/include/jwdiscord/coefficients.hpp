#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jwdiscord/spectral.hpp"

namespace jwd {

/// Which initial state a coefficient set describes.
enum class StateFamily {
  ThreeNode,  ///< polarized inner node plus parasitic polarization of its two neighbours
  Noise1,     ///< noise-polarized chain, truncated at first order in the noise
  Noise2,     ///< noise-polarized chain, truncated at second order in the noise
};

const char* to_string(StateFamily family);

/// Per-site inverse-temperature parameters b_j (dimensionless).
struct PolarizationProfile {
  std::vector<double> b;
};

/// One draw of the random noise offsets b~_j, each in [-1/2, 1/2].
struct NoiseRealization {
  std::vector<double> b_tilde;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int index = 0;

  void validate(int n_sites) const;
};

/// Deterministic draw: realization `index` of the stream identified by
/// `seed`. The offsets do not depend on epsilon, so different amplitudes
/// share the same random directions.
NoiseRealization draw_noise(int n_sites, double epsilon, std::uint64_t seed, int index);

/// weight * n_{s1} n_{s2} ... with n_s = c_s^+ c_s = sum_{k,k'} g_k(s) g_k'(s) beta_k^+ beta_k'.
struct SiteTerm {
  double weight;
  std::vector<Site> sites;  // 1 to 3 distinct sites, leading site first
};

/// Evolved density operator in pre-canonic monomial form
///
///   A0 + sum A_{kk'} b+_k b_k' + sum A_{kqk'q'} b+_k b_k' b+_q b_q'
///      + sum A_{kqlk'q'l'} b+_k b_k' b+_q b_q' b+_l b_l'
///
/// (time phases omitted), stored factored by lattice site. Site-contracted
/// tables make every tensor entry O(1): the quadratic and quartic tensors are
/// kept as N^2 and N^4 tables, the sextic one as one N^4 table per distinct
/// leading site. Immutable once built.
///
/// Tensor accessors take 0-based mode indices, creation indices first.
class CoeffSet {
 public:
  CoeffSet(SpectralPtr spec, StateFamily family, double a0, std::vector<SiteTerm> terms);

  StateFamily family() const { return family_; }
  const SpectralData& spectral() const { return *spec_; }
  const SpectralPtr& spectral_ptr() const { return spec_; }
  int size() const { return spec_->size(); }

  double a0() const { return a0_; }
  /// Trace of the (unnormalized) represented operator.
  double norm() const { return norm_; }
  const std::vector<SiteTerm>& site_terms() const { return terms_; }
  /// Highest fermion-pair degree with a stored term (0..3).
  int max_degree() const { return max_degree_; }

  double quadratic(int k, int kp) const { return a2_(k, kp); }
  double quartic(int k, int q, int kp, int qp) const { return a4_(pair(k, kp), pair(q, qp)); }
  double sextic(int k, int q, int l, int kp, int qp, int lp) const {
    double sum = 0.0;
    for (const auto& lead : a6_) sum += lead.g(k) * lead.g(kp) * lead.table(pair(q, qp), pair(l, lp));
    return sum;
  }

 private:
  struct SexticLead {
    Eigen::VectorXd g;      // g_k(s1) over k
    Eigen::MatrixXd table;  // [(q,q'), (l,l')] contraction of the trailing sites
  };

  int pair(int a, int b) const { return a * spec_->size() + b; }
  void build_tables();

  SpectralPtr spec_;
  StateFamily family_;
  double a0_;
  std::vector<SiteTerm> terms_;
  int max_degree_ = 0;
  double norm_ = 1.0;
  Eigen::MatrixXd a2_;
  Eigen::MatrixXd a4_;
  std::vector<SexticLead> a6_;
};

/// Inner node j0 polarized with b_0, neighbours j0-1 and j0+1 with b_minus
/// and b_plus; all other nodes unpolarized.
CoeffSet three_node_coeffs(SpectralPtr spec, Site j0, double b_minus, double b_0, double b_plus);

/// Node j0 polarized with b_j0 on top of noise polarization epsilon * b~_j on
/// every node, expanded to `order` (1 or 2) in the noise amplitudes of the
/// nodes other than j0.
CoeffSet noise_coeffs(SpectralPtr spec, Site j0, double b_j0, const NoiseRealization& noise, int order);

/// A single fermion creation or annihilation operator.
struct FermionOp {
  Mode mode;
  bool creation;
};

/// Trace over the 2^N-dimensional Fock space of the ordered operator product.
double monomial_trace(std::span<const FermionOp> ops, int n_modes);

/// Trace of the operator represented by `coeffs` (before normalization).
double monomial_trace(const CoeffSet& coeffs);

/// Largest violation of the four sum rules
///   sum_q A_{kqqk'} = sum_q A_{klqk'ql'} = sum_q A_{kqlqk'l'} = sum_q A_{klqqk'l'} = 0
/// over all free indices.
double sum_rule_residual(const CoeffSet& coeffs);

}  // namespace jwd
