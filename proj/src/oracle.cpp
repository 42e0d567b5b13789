#include "jwdiscord/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "jwdiscord/discord.hpp"

namespace jwd::oracle {
namespace {

using Triplet = Eigen::Triplet<double>;

double max_abs(const SparseOp& m) {
  double v = 0.0;
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseOp::InnerIterator it(m, col); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

SparseOp identity(int dim) {
  SparseOp id(dim, dim);
  id.setIdentity();
  return id;
}

// Tr(rho O) for sparse O.
std::complex<double> expect(const Eigen::MatrixXcd& rho, const SparseOp& op) {
  std::complex<double> sum = 0.0;
  for (int col = 0; col < op.outerSize(); ++col)
    for (SparseOp::InnerIterator it(op, col); it; ++it) sum += rho(it.col(), it.row()) * it.value();
  return sum;
}

Eigen::MatrixXd normalized_diagonal(Eigen::VectorXd diag) {
  const double tr = diag.sum();
  if (!(tr > 0.0)) throw std::domain_error("oracle state has non-positive trace");
  diag /= tr;
  return diag.asDiagonal();
}

}  // namespace

FockOperators::FockOperators(SpectralPtr spec) : spec_(std::move(spec)) {
  if (!spec_) throw std::invalid_argument("FockOperators: null spectral data");
  n_ = spec_->size();
  if (n_ > kMaxSites) throw std::invalid_argument("Fock-space oracle limited to N <= 12, got " + std::to_string(n_));
  dim_ = 1 << n_;

  c_.reserve(n_);
  for (int j = 0; j < n_; ++j) {
    std::vector<Triplet> entries;
    entries.reserve(dim_ / 2);
    const unsigned bit = 1u << j;
    for (unsigned x = 0; x < static_cast<unsigned>(dim_); ++x) {
      if (!(x & bit)) continue;
      const double sign = std::popcount(x & (bit - 1)) % 2 ? -1.0 : 1.0;
      entries.emplace_back(static_cast<int>(x ^ bit), static_cast<int>(x), sign);
    }
    SparseOp op(dim_, dim_);
    op.setFromTriplets(entries.begin(), entries.end());
    c_.push_back(std::move(op));
  }

  h_fermion_ = SparseOp(dim_, dim_);
  for (int k = 0; k < n_; ++k) {
    SparseOp b(dim_, dim_);
    for (int j = 0; j < n_; ++j) b += spec_->g(k, j) * c_[j];
    b.prune(0.0);
    SparseOp nk = SparseOp(b.transpose()) * b;
    h_fermion_ += spec_->energy(k) * nk;
    beta_.push_back(std::move(b));
    number_.push_back(std::move(nk));
  }
  h_fermion_ -= 0.5 * n_ * spec_->config().omega0 * identity(dim_);

  // Spin form: I^+_i I^-_{i+1} + h.c. flips an antiparallel neighbour pair.
  const double d = spec_->config().coupling;
  const double w0 = spec_->config().omega0;
  std::vector<Triplet> entries;
  for (unsigned x = 0; x < static_cast<unsigned>(dim_); ++x) {
    double diag = 0.0;
    for (int i = 0; i < n_; ++i) diag += w0 * (((x >> i) & 1u) ? 0.5 : -0.5);
    entries.emplace_back(x, x, diag);
    for (int i = 0; i + 1 < n_; ++i) {
      const unsigned a = (x >> i) & 1u, b = (x >> (i + 1)) & 1u;
      if (a != b) entries.emplace_back(static_cast<int>(x ^ (3u << i)), static_cast<int>(x), d / 2);
    }
  }
  h_spin_ = SparseOp(dim_, dim_);
  h_spin_.setFromTriplets(entries.begin(), entries.end());
}

FockOperators build_operators(SpectralPtr spec) { return FockOperators(std::move(spec)); }

Eigen::VectorXd FockOperators::iz(int j) const {
  Eigen::VectorXd v(dim_);
  for (int x = 0; x < dim_; ++x) v(x) = ((x >> j) & 1) ? 0.5 : -0.5;
  return v;
}

void FockOperators::diagonalize() const {
  std::call_once(diag_once_, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(h_spin_)};
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  });
}

const Eigen::VectorXd& FockOperators::eigenvalues() const {
  diagonalize();
  return evals_;
}

const Eigen::MatrixXd& FockOperators::eigenvectors() const {
  diagonalize();
  return evecs_;
}

double FockOperators::site_anticommutator_residual() const {
  double worst = 0.0;
  const SparseOp id = identity(dim_);
  for (int j = 0; j < n_; ++j)
    for (int l = 0; l < n_; ++l) {
      const SparseOp cl_dag = c_[l].transpose();
      SparseOp mixed = c_[j] * cl_dag + cl_dag * c_[j];
      if (j == l) mixed -= id;
      const SparseOp same = c_[j] * c_[l] + c_[l] * c_[j];
      worst = std::max({worst, max_abs(mixed), max_abs(same)});
    }
  return worst;
}

double FockOperators::mode_anticommutator_residual() const {
  double worst = 0.0;
  const SparseOp id = identity(dim_);
  for (int k = 0; k < n_; ++k)
    for (int q = 0; q < n_; ++q) {
      const SparseOp bq_dag = beta_[q].transpose();
      SparseOp mixed = beta_[k] * bq_dag + bq_dag * beta_[k];
      if (k == q) mixed -= id;
      const SparseOp same = beta_[k] * beta_[q] + beta_[q] * beta_[k];
      worst = std::max({worst, max_abs(mixed), max_abs(same)});
    }
  return worst;
}

double FockOperators::number_identity_residual() const {
  double worst = 0.0;
  for (int j = 0; j < n_; ++j) {
    const SparseOp nj = SparseOp(c_[j].transpose()) * c_[j];
    const Eigen::VectorXd z = iz(j);
    const Eigen::MatrixXd diff = Eigen::MatrixXd(nj) - Eigen::MatrixXd((z.array() + 0.5).matrix().asDiagonal());
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

double FockOperators::spectrum_residual(const SparseOp& h) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h), Eigen::EigenvaluesOnly);
  std::vector<double> expected(dim_);
  const double shift = -0.5 * n_ * spec_->config().omega0;
  for (int x = 0; x < dim_; ++x) {
    double e = shift;
    for (int k = 0; k < n_; ++k)
      if ((x >> k) & 1) e += spec_->energy(k);
    expected[x] = e;
  }
  std::sort(expected.begin(), expected.end());
  double worst = 0.0;
  for (int x = 0; x < dim_; ++x) worst = std::max(worst, std::abs(es.eigenvalues()(x) - expected[x]));
  return worst;
}

Eigen::MatrixXd exact_state(const FockOperators& ops, const PolarizationProfile& profile) {
  if (static_cast<int>(profile.b.size()) != ops.size())
    throw std::invalid_argument("polarization profile length does not match the chain");
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(ops.dim());
  for (int j = 0; j < ops.size(); ++j)
    diag.array() *= 1.0 + 2.0 * ops.iz(j).array() * std::tanh(profile.b[j] / 2);
  return normalized_diagonal(std::move(diag));
}

Eigen::MatrixXd exact_state_diagonal(const FockOperators& ops, const std::vector<IzTerm>& terms) {
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(ops.dim());
  for (const auto& term : terms) {
    Eigen::VectorXd prod = Eigen::VectorXd::Constant(ops.dim(), term.gamma);
    for (Site s : term.sites) prod.array() *= ops.iz(s.index - 1).array();
    diag += prod;
  }
  return normalized_diagonal(std::move(diag));
}

Eigen::MatrixXd exact_noise_state(const FockOperators& ops, Site j0, double b_j0, const NoiseRealization& noise,
                                  int order) {
  const int n = ops.size();
  if (order != 1 && order != 2) throw std::invalid_argument("noise expansion order must be 1 or 2");
  noise.validate(n);
  const int c = j0.index - 1;
  const double tau = std::tanh(b_j0 / 2);
  Eigen::VectorXd diag(ops.dim());
  for (int x = 0; x < ops.dim(); ++x) {
    auto occ = [&](int j) { return ((x >> j) & 1) ? 1.0 : 0.0; };
    // Node factor 1 + I_z (2 tanh + eps b~) for j0, 1 + I_z eps b~ otherwise,
    // written as a0 + a1 * occupation.
    auto a0 = [&](int j) { return 1.0 - noise.epsilon * noise.b_tilde[j] / 2 - (j == c ? tau : 0.0); };
    auto a1 = [&](int j) { return noise.epsilon * noise.b_tilde[j] + (j == c ? 2 * tau : 0.0); };
    double series = 0.0;
    double zeroth = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != c) zeroth *= a0(m);
    series += zeroth;
    for (int s = 0; s < n; ++s) {
      if (s == c) continue;
      double term = a1(s) * occ(s);
      for (int m = 0; m < n; ++m)
        if (m != c && m != s) term *= a0(m);
      series += term;
    }
    if (order == 2) {
      for (int s = 0; s < n; ++s)
        for (int r = s + 1; r < n; ++r) {
          if (s == c || r == c) continue;
          double term = a1(s) * occ(s) * a1(r) * occ(r);
          for (int m = 0; m < n; ++m)
            if (m != c && m != s && m != r) term *= a0(m);
          series += term;
        }
    }
    diag(x) = (a0(c) + a1(c) * occ(c)) * series;
  }
  return normalized_diagonal(std::move(diag));
}

Eigen::MatrixXcd evolve(const FockOperators& ops, const Eigen::MatrixXd& rho0, double t) {
  const Eigen::MatrixXd& v = ops.eigenvectors();
  const Eigen::VectorXd& e = ops.eigenvalues();
  const Eigen::MatrixXd in_eigenbasis = v.transpose() * rho0 * v;
  Eigen::MatrixXcd phased(ops.dim(), ops.dim());
  for (int a = 0; a < ops.dim(); ++a)
    for (int b = 0; b < ops.dim(); ++b) phased(a, b) = in_eigenbasis(a, b) * std::polar(1.0, -t * (e(a) - e(b)));
  return v.cast<std::complex<double>>() * phased * v.transpose().cast<std::complex<double>>();
}

XMatrix reduced_from_state(const FockOperators& ops, const Eigen::MatrixXcd& rho_t, Mode n, Mode m) {
  if (n.index == m.index) throw std::invalid_argument("reduced_from_state needs two distinct modes");
  if (n.index < 1 || n.index > ops.size() || m.index < 1 || m.index > ops.size())
    throw std::out_of_range("mode index out of range");
  const SparseOp id = identity(ops.dim());
  const SparseOp& nn = ops.number(n.index - 1);
  const SparseOp& nm = ops.number(m.index - 1);
  const SparseOp empty_n = id - nn;
  const SparseOp empty_m = id - nm;
  XMatrix x;
  x.r11 = expect(rho_t, SparseOp(empty_n * empty_m)).real();
  x.r22 = expect(rho_t, SparseOp(nn * empty_m)).real();
  x.r33 = expect(rho_t, SparseOp(empty_n * nm)).real();
  x.r44 = expect(rho_t, SparseOp(nn * nm)).real();
  x.r23 = expect(rho_t, SparseOp(SparseOp(ops.beta(m.index - 1).transpose()) * ops.beta(n.index - 1)));
  return x;
}

XMatrix exact_reduced(const FockOperators& ops, const Eigen::MatrixXd& rho0, Mode n, Mode m, double t) {
  return reduced_from_state(ops, evolve(ops, rho0, t), n, m);
}

std::vector<IzTerm> random_iz_terms(int n_sites, std::mt19937_64& gen) {
  // Each |prod I_z| <= 2^-|S|, so this scaling keeps 1 + sum positive.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scale = 0.9 / ((1 << n_sites) - 1);
  std::vector<IzTerm> terms;
  for (int mask = 1; mask < (1 << n_sites); ++mask) {
    IzTerm term{scale * std::ldexp(unit(gen), std::popcount(static_cast<unsigned>(mask))), {}};
    for (int j = 0; j < n_sites; ++j)
      if ((mask >> j) & 1) term.sites.push_back(Site{j + 1});
    terms.push_back(std::move(term));
  }
  return terms;
}

double x_distance(const XMatrix& a, const XMatrix& b) {
  return std::max({std::abs(a.r11 - b.r11), std::abs(a.r22 - b.r22), std::abs(a.r33 - b.r33),
                   std::abs(a.r44 - b.r44), std::abs(a.r23 - b.r23)});
}

std::vector<CheckResult> run_self_checks(SpectralPtr spec, std::uint64_t seed) {
  const FockOperators ops(spec);
  const int n = ops.size();
  const std::array<double, 5> times{0.0, 0.7, 1.3, 5.1, 23.7};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<CheckResult> out;
  out.push_back({"site-anticommutators", ops.site_anticommutator_residual(), 1e-12});
  out.push_back({"mode-anticommutators", ops.mode_anticommutator_residual(), 1e-10});
  out.push_back({"number-identity", ops.number_identity_residual(), 1e-12});
  out.push_back({"spectrum-fermion-form", ops.spectrum_residual(ops.fermion_hamiltonian()), 1e-9});
  out.push_back({"spectrum-spin-form", ops.spectrum_residual(ops.spin_hamiltonian()), 1e-9});
  out.push_back({"hamiltonian-forms-agree",
                 Eigen::MatrixXd(ops.fermion_hamiltonian() - ops.spin_hamiltonian()).cwiseAbs().maxCoeff(), 1e-12});

  auto worst_pair_distance = [&](const CoeffSet& coeffs, const Eigen::MatrixXd& rho0) {
    double worst = 0.0;
    for (double t : times) {
      const Eigen::MatrixXcd rho_t = evolve(ops, rho0, t);
      for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) {
          const XMatrix analytic = assemble_x(reduce_pair(coeffs, Mode{a}, Mode{b}), *spec, t);
          worst = std::max(worst, x_distance(analytic, reduced_from_state(ops, rho_t, Mode{a}, Mode{b})));
        }
    }
    return worst;
  };

  if (n >= 3) {
    double worst = 0.0;
    for (int j0 = 2; j0 < n; ++j0)
      for (int rep = 0; rep < 3; ++rep) {
        const double bm = unit(gen), b0 = 5.0 * (unit(gen) + 1.0), bp = unit(gen);
        PolarizationProfile profile{std::vector<double>(n, 0.0)};
        profile.b[j0 - 2] = bm;
        profile.b[j0 - 1] = b0;
        profile.b[j0] = bp;
        worst = std::max(worst, worst_pair_distance(three_node_coeffs(spec, Site{j0}, bm, b0, bp),
                                                    exact_state(ops, profile)));
      }
    out.push_back({"three-node-equivalence", worst, 1e-10});
  }

  for (int order : {1, 2}) {
    const int j0 = (n + 1) / 2;
    const NoiseRealization noise = draw_noise(n, 0.4, seed, order);
    const double worst = worst_pair_distance(noise_coeffs(spec, Site{j0}, 1.0, noise, order),
                                             exact_noise_state(ops, Site{j0}, 1.0, noise, order));
    out.push_back({"noise-order-" + std::to_string(order) + "-equivalence", worst, 1e-10});
  }

  double worst_drift = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<IzTerm> terms = random_iz_terms(n, gen);
    const Eigen::MatrixXd rho0 = exact_state_diagonal(ops, terms);
    std::vector<double> reference;
    for (double t : times) {
      const Eigen::MatrixXcd rho_t = evolve(ops, rho0, t);
      int idx = 0;
      for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b, ++idx) {
          const double q = discord_pair(reduced_from_state(ops, rho_t, Mode{a}, Mode{b})).q;
          if (t == times.front())
            reference.push_back(q);
          else
            worst_drift = std::max(worst_drift, std::abs(q - reference[idx]));
        }
    }
  }
  out.push_back({"general-stationarity", worst_drift, 1e-10});
  return out;
}

}  // namespace jwd::oracle
