#include "jwdiscord/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace jwd {

const char* to_string(StateFamily family) {
  switch (family) {
    case StateFamily::ThreeNode: return "three-node";
    case StateFamily::Noise1: return "noise-1";
    case StateFamily::Noise2: return "noise-2";
  }
  return "unknown";
}

void NoiseRealization::validate(int n_sites) const {
  if (static_cast<int>(b_tilde.size()) != n_sites)
    throw std::invalid_argument("noise realization has " + std::to_string(b_tilde.size()) + " offsets, chain has " +
                                std::to_string(n_sites) + " nodes");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("noise amplitude must be >= 0");
  for (double v : b_tilde)
    if (!(v >= -0.5 && v <= 0.5)) throw std::invalid_argument("noise offset outside [-1/2, 1/2]");
}

NoiseRealization draw_noise(int n_sites, double epsilon, std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 gen(seq);
  NoiseRealization out;
  out.epsilon = epsilon;
  out.seed = seed;
  out.index = index;
  out.b_tilde.resize(n_sites);
  // 53 high bits -> [0, 1); spelled out so draws do not depend on the
  // standard library's distribution implementation.
  for (double& v : out.b_tilde) v = std::ldexp(static_cast<double>(gen() >> 11), -53) - 0.5;
  return out;
}

CoeffSet::CoeffSet(SpectralPtr spec, StateFamily family, double a0, std::vector<SiteTerm> terms)
    : spec_(std::move(spec)), family_(family), a0_(a0), terms_(std::move(terms)) {
  if (!spec_) throw std::invalid_argument("coefficient set needs spectral data");
  const int n = spec_->size();
  for (const auto& term : terms_) {
    if (term.sites.empty() || term.sites.size() > 3) throw std::invalid_argument("site term must touch 1 to 3 sites");
    for (std::size_t i = 0; i < term.sites.size(); ++i) {
      if (term.sites[i].index < 1 || term.sites[i].index > n) throw std::out_of_range("site index out of range");
      for (std::size_t j = 0; j < i; ++j)
        if (term.sites[i].index == term.sites[j].index) throw std::invalid_argument("site term repeats a site");
    }
    max_degree_ = std::max(max_degree_, static_cast<int>(term.sites.size()));
  }
  build_tables();
  norm_ = monomial_trace(*this);
}

void CoeffSet::build_tables() {
  const int n = spec_->size();
  const Eigen::MatrixXd& g = spec_->transform();
  auto site_projector = [&](int s) -> Eigen::MatrixXd { return g.col(s) * g.col(s).transpose(); };
  auto flatten = [&](const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v(pair(a, b)) = m(a, b);
    return v;
  };

  a2_ = Eigen::MatrixXd::Zero(n, n);
  a4_ = Eigen::MatrixXd::Zero(n * n, n * n);

  // Group by leading sites so each table is a short sum of outer products.
  std::map<int, Eigen::MatrixXd> quartic_tail;                  // s1 -> sum w G^{s2}
  std::map<int, std::map<int, Eigen::MatrixXd>> sextic_tail;    // s1 -> s2 -> sum w G^{s3}
  for (const auto& term : terms_) {
    const int s1 = term.sites[0].index - 1;
    switch (term.sites.size()) {
      case 1:
        a2_ += term.weight * site_projector(s1);
        break;
      case 2: {
        auto [it, fresh] = quartic_tail.try_emplace(s1, Eigen::MatrixXd::Zero(n, n));
        it->second += term.weight * site_projector(term.sites[1].index - 1);
        break;
      }
      case 3: {
        auto& inner = sextic_tail[s1];
        auto [it, fresh] = inner.try_emplace(term.sites[1].index - 1, Eigen::MatrixXd::Zero(n, n));
        it->second += term.weight * site_projector(term.sites[2].index - 1);
        break;
      }
    }
  }
  for (const auto& [s1, tail] : quartic_tail) a4_.noalias() += flatten(site_projector(s1)) * flatten(tail).transpose();
  for (const auto& [s1, inner] : sextic_tail) {
    SexticLead lead{g.col(s1), Eigen::MatrixXd::Zero(n * n, n * n)};
    for (const auto& [s2, tail] : inner)
      lead.table.noalias() += flatten(site_projector(s2)) * flatten(tail).transpose();
    a6_.push_back(std::move(lead));
  }
}

namespace {

int inner_site(const SpectralData& spec, Site j0, bool require_inner) {
  const int n = spec.size();
  if (j0.index < 1 || j0.index > n) throw std::out_of_range("polarized node outside the chain");
  if (require_inner && (j0.index == 1 || j0.index == n))
    throw std::invalid_argument("three-node state needs an inner polarized node (1 < j0 < N)");
  return j0.index;
}

}  // namespace

CoeffSet three_node_coeffs(SpectralPtr spec, Site j0, double b_minus, double b_0, double b_plus) {
  if (!spec) throw std::invalid_argument("three_node_coeffs: null spectral data");
  const int c = inner_site(*spec, j0, true);
  const int n = spec->size();
  const std::array<int, 3> sites{c - 1, c, c + 1};
  const std::array<double, 3> t{std::tanh(b_minus / 2), std::tanh(b_0 / 2), std::tanh(b_plus / 2)};
  const std::array<double, 3> u{1 - t[0], 1 - t[1], 1 - t[2]};

  std::vector<SiteTerm> terms;
  for (int i = 0; i < 3; ++i) {
    double w = t[i];
    for (int j = 0; j < 3; ++j)
      if (j != i) w *= u[j];
    terms.push_back({std::ldexp(w, 1 - n), {Site{sites[i]}}});
  }
  // Pair order (j0, j0+1), (j0-1, j0+1), (j0-1, j0): the spectator is the
  // node carrying the (1 - tanh) factor.
  for (int spectator = 0; spectator < 3; ++spectator) {
    std::vector<Site> pair;
    for (int i = 0; i < 3; ++i)
      if (i != spectator) pair.push_back(Site{sites[i]});
    double w = u[spectator];
    for (int i = 0; i < 3; ++i)
      if (i != spectator) w *= t[i];
    terms.push_back({std::ldexp(w, 2 - n), std::move(pair)});
  }
  terms.push_back({std::ldexp(t[0] * t[1] * t[2], 3 - n), {Site{sites[0]}, Site{sites[1]}, Site{sites[2]}}});

  const double a0 = std::ldexp(u[0] * u[1] * u[2], -n);
  return CoeffSet(std::move(spec), StateFamily::ThreeNode, a0, std::move(terms));
}

CoeffSet noise_coeffs(SpectralPtr spec, Site j0, double b_j0, const NoiseRealization& noise, int order) {
  if (!spec) throw std::invalid_argument("noise_coeffs: null spectral data");
  if (order != 1 && order != 2) throw std::invalid_argument("noise expansion order must be 1 or 2");
  const int n = spec->size();
  const int c = inner_site(*spec, j0, false) - 1;
  noise.validate(n);

  const double tau = std::tanh(b_j0 / 2);
  // Each node factor is a0[j] + a1[j] n_j.
  std::vector<double> a0(n), a1(n);
  for (int j = 0; j < n; ++j) {
    const double e = noise.epsilon * noise.b_tilde[j];
    a0[j] = (j == c ? 1 - tau : 1.0) - e / 2;
    a1[j] = (j == c ? 2 * tau : 0.0) + e;
  }
  auto rest_product = [&](int skip1, int skip2) {
    double p = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != c && m != skip1 && m != skip2) p *= a0[m];
    return p;
  };
  const double scale = std::ldexp(1.0, -n);

  std::vector<SiteTerm> terms;
  terms.push_back({scale * a1[c] * rest_product(-1, -1), {Site{c + 1}}});
  for (int s = 0; s < n; ++s) {
    if (s == c) continue;
    terms.push_back({scale * a0[c] * rest_product(s, -1) * a1[s], {Site{s + 1}}});
  }
  for (int s = 0; s < n; ++s) {
    if (s == c) continue;
    terms.push_back({scale * a1[c] * rest_product(s, -1) * a1[s], {Site{c + 1}, Site{s + 1}}});
  }
  if (order == 2) {
    // Unordered node pairs: the second-order term of the product expansion.
    for (int s = 0; s < n; ++s) {
      for (int r = s + 1; r < n; ++r) {
        if (s == c || r == c) continue;
        const double w = scale * rest_product(s, r) * a1[s] * a1[r];
        terms.push_back({a0[c] * w, {Site{s + 1}, Site{r + 1}}});
        terms.push_back({a1[c] * w, {Site{c + 1}, Site{s + 1}, Site{r + 1}}});
      }
    }
  }

  double all = 1.0;
  for (double v : a0) all *= v;
  return CoeffSet(std::move(spec), order == 1 ? StateFamily::Noise1 : StateFamily::Noise2, scale * all,
                  std::move(terms));
}

double sum_rule_residual(const CoeffSet& coeffs) {
  const int n = coeffs.size();
  double worst = 0.0;
  if (coeffs.max_degree() >= 2) {
    for (int k = 0; k < n; ++k)
      for (int kp = 0; kp < n; ++kp) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += coeffs.quartic(k, q, q, kp);
        worst = std::max(worst, std::abs(s));
      }
  }
  if (coeffs.max_degree() >= 3) {
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int kp = 0; kp < n; ++kp)
          for (int lp = 0; lp < n; ++lp) {
            double s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (int q = 0; q < n; ++q) {
              s1 += coeffs.sextic(k, l, q, kp, q, lp);
              s2 += coeffs.sextic(k, q, l, q, kp, lp);
              s3 += coeffs.sextic(k, l, q, q, kp, lp);
            }
            worst = std::max({worst, std::abs(s1), std::abs(s2), std::abs(s3)});
          }
  }
  return worst;
}

}  // namespace jwd
