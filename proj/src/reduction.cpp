#include "jwdiscord/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace jwd {

void XMatrix::validate(double tol) const {
  const double tr = trace();
  if (!std::isfinite(tr) || !std::isfinite(std::abs(r23))) throw std::domain_error("X-matrix has non-finite entries");
  if (std::abs(tr - 1.0) > tol) throw std::domain_error("X-matrix trace is " + std::to_string(tr));
  for (double d : {r11, r22, r33, r44})
    if (d < -1e-12) throw std::domain_error("X-matrix has a negative diagonal entry " + std::to_string(d));
  if (r22 * r33 - std::norm(r23) < -tol) throw std::domain_error("X-matrix central block is not positive semidefinite");
}

namespace {

struct Permutation {
  std::array<int, 3> order;
  int parity;
};

// All orderings of 1..3 items with their signs.
const std::vector<Permutation>& permutations(int size) {
  static const std::array<std::vector<Permutation>, 4> table = [] {
    std::array<std::vector<Permutation>, 4> t;
    for (int s = 1; s <= 3; ++s) {
      std::array<int, 3> idx{0, 1, 2};
      do {
        int inversions = 0;
        for (int i = 0; i < s; ++i)
          for (int j = i + 1; j < s; ++j)
            if (idx[i] > idx[j]) ++inversions;
        t[s].push_back({idx, inversions % 2 ? -1 : 1});
      } while (std::next_permutation(idx.begin(), idx.begin() + s));
    }
    return t;
  }();
  return table[size];
}

class PairReducer {
 public:
  PairReducer(const CoeffSet& coeffs, int n, int m) : coeffs_(coeffs), size_(coeffs.size()) {
    for (int k = 0; k < size_; ++k)
      if (k != n && k != m) others_.push_back(k);
  }

  // Coefficient, in the reduced two-mode operator, of the normal-ordered
  // target b+_{fixed_c...} b_{...fixed_a}, collected from every canonic
  // monomial whose extra creation and annihilation indices coincide as a set
  // of `spectators` traced-out modes. Canonic coefficients are +A for the
  // quadratic part and -A for the quartic and sextic parts.
  double collect(const std::vector<int>& fixed_c, const std::vector<int>& fixed_a, int spectators) const {
    const int degree = static_cast<int>(fixed_c.size()) + spectators;
    if (degree > coeffs_.max_degree()) return 0.0;
    double sum = 0.0;
    std::vector<int> chosen(spectators);
    for_each_combination(chosen, 0, 0, [&] {
      // Reference ordering b+_{fixed} b+_{R} b_{R reversed} b_{fixed}
      // equals prod_R N_r times the target.
      std::array<int, 3> ref_c{}, ref_a{};
      int pos = 0;
      for (int v : fixed_c) ref_c[pos++] = v;
      for (int v : chosen) ref_c[pos++] = v;
      pos = 0;
      for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) ref_a[pos++] = *it;
      for (int v : fixed_a) ref_a[pos++] = v;

      for (const auto& pc : permutations(degree)) {
        std::array<int, 3> c{};
        for (int i = 0; i < degree; ++i) c[i] = ref_c[pc.order[i]];
        for (const auto& pa : permutations(degree)) {
          std::array<int, 3> a{};
          for (int i = 0; i < degree; ++i) a[i] = ref_a[pa.order[i]];
          sum += pc.parity * pa.parity * entry(degree, c, a);
        }
      }
    });
    if (degree >= 2) sum = -sum;
    return std::ldexp(sum, size_ - 2 - spectators);
  }

  double identity_part() const { return std::ldexp(coeffs_.a0(), size_ - 2); }

 private:
  double entry(int degree, const std::array<int, 3>& c, const std::array<int, 3>& a) const {
    switch (degree) {
      case 1: return coeffs_.quadratic(c[0], a[0]);
      case 2: return coeffs_.quartic(c[0], c[1], a[0], a[1]);
      default: return coeffs_.sextic(c[0], c[1], c[2], a[0], a[1], a[2]);
    }
  }

  template <class Fn>
  void for_each_combination(std::vector<int>& chosen, int depth, std::size_t start, Fn&& fn) const {
    if (depth == static_cast<int>(chosen.size())) {
      fn();
      return;
    }
    for (std::size_t i = start; i < others_.size(); ++i) {
      chosen[depth] = others_[i];
      for_each_combination(chosen, depth + 1, i + 1, fn);
    }
  }

  const CoeffSet& coeffs_;
  int size_;
  std::vector<int> others_;
};

}  // namespace

ReducedCoeffs reduce_pair(const CoeffSet& coeffs, Mode n, Mode m) {
  const int size = coeffs.size();
  if (n.index < 1 || n.index > size || m.index < 1 || m.index > size)
    throw std::out_of_range("mode index out of range");
  if (n.index == m.index) throw std::invalid_argument("reduce_pair needs two distinct modes");
  const int a = n.index - 1;
  const int b = m.index - 1;
  const PairReducer r(coeffs, a, b);

  ReducedCoeffs out;
  out.n = n;
  out.m = m;
  out.b = r.identity_part() + r.collect({}, {}, 1) + r.collect({}, {}, 2) + r.collect({}, {}, 3);
  auto one_body = [&](int k, int kp) {
    return r.collect({k}, {kp}, 0) + r.collect({k}, {kp}, 1) + r.collect({k}, {kp}, 2);
  };
  out.b_nn = one_body(a, a);
  out.b_mm = one_body(b, b);
  out.b_nm = one_body(a, b);
  out.b_mn = one_body(b, a);
  out.c = r.collect({a, b}, {b, a}, 0) + r.collect({a, b}, {b, a}, 1);

  const double z = coeffs.norm();
  for (double* v : {&out.b, &out.b_nn, &out.b_mm, &out.b_nm, &out.b_mn, &out.c}) *v /= z;
  return out;
}

XMatrix assemble_x(const ReducedCoeffs& red, const SpectralData& spec, double t) {
  const double de = spec.energy(red.n.index - 1) - spec.energy(red.m.index - 1);
  XMatrix x;
  x.r11 = red.b;
  x.r22 = red.b + red.b_nn;
  x.r33 = red.b + red.b_mm;
  x.r44 = red.b + red.b_nn + red.b_mm + red.c;
  x.r23 = red.b_nm * std::polar(1.0, -t * de);
  return x;
}

}  // namespace jwd
