#include <algorithm>
#include <bit>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "jwdiscord/coefficients.hpp"

namespace jwd {
namespace {

// Trace restricted to the modes the product touches. Modes are relabelled
// 0..d-1 in order of first appearance; the trace is invariant under such a
// relabelling, so results are memoized by pattern.
double reduced_trace(const std::vector<std::pair<int, bool>>& ops, int distinct) {
  double total = 0.0;
  for (std::uint32_t occ = 0; occ < (1u << distinct); ++occ) {
    std::uint32_t state = occ;
    int sign = 1;
    bool alive = true;
    for (auto it = ops.rbegin(); it != ops.rend() && alive; ++it) {
      const auto [mode, creation] = *it;
      const std::uint32_t bit = 1u << mode;
      const bool occupied = (state & bit) != 0;
      if (occupied == creation) {
        alive = false;
        break;
      }
      if (std::popcount(state & (bit - 1)) % 2) sign = -sign;
      state ^= bit;
    }
    if (alive && state == occ) total += sign;
  }
  return total;
}

std::uint64_t encode(const std::vector<std::pair<int, bool>>& ops) {
  std::uint64_t key = ops.size();
  for (const auto& [mode, creation] : ops) key = key * 16 + static_cast<std::uint64_t>(mode * 2 + creation);
  return key;
}

}  // namespace

double monomial_trace(std::span<const FermionOp> ops, int n_modes) {
  std::vector<int> labels;
  std::vector<std::pair<int, bool>> local;
  local.reserve(ops.size());
  for (const auto& op : ops) {
    if (op.mode.index < 1 || op.mode.index > n_modes) throw std::out_of_range("mode index out of range");
    auto it = std::find(labels.begin(), labels.end(), op.mode.index);
    int label = static_cast<int>(it - labels.begin());
    if (it == labels.end()) labels.push_back(op.mode.index);
    local.emplace_back(label, op.creation);
  }
  const int distinct = static_cast<int>(labels.size());
  if (distinct > 8) throw std::invalid_argument("monomial touches too many modes");

  thread_local std::unordered_map<std::uint64_t, double> cache;
  const std::uint64_t key = encode(local);
  auto hit = cache.find(key);
  double value;
  if (hit != cache.end()) {
    value = hit->second;
  } else {
    value = reduced_trace(local, distinct);
    cache.emplace(key, value);
  }
  return std::ldexp(value, n_modes - distinct);
}

double monomial_trace(const CoeffSet& coeffs) {
  const int n = coeffs.size();
  double total = std::ldexp(coeffs.a0(), n);
  if (coeffs.max_degree() >= 1) {
    for (int k = 0; k < n; ++k) {
      const std::array<FermionOp, 2> ops{{{Mode{k + 1}, true}, {Mode{k + 1}, false}}};
      total += coeffs.quadratic(k, k) * monomial_trace(ops, n);
    }
  }
  // Only monomials whose annihilation multiset equals the creation multiset
  // have a non-zero trace; enumerate the distinct arrangements.
  if (coeffs.max_degree() >= 2) {
    for (int k = 0; k < n; ++k) {
      for (int q = 0; q < n; ++q) {
        std::array<int, 2> ann{k, q};
        std::sort(ann.begin(), ann.end());
        do {
          const std::array<FermionOp, 4> ops{{{Mode{k + 1}, true},
                                              {Mode{ann[0] + 1}, false},
                                              {Mode{q + 1}, true},
                                              {Mode{ann[1] + 1}, false}}};
          total += coeffs.quartic(k, q, ann[0], ann[1]) * monomial_trace(ops, n);
        } while (std::next_permutation(ann.begin(), ann.end()));
      }
    }
  }
  if (coeffs.max_degree() >= 3) {
    for (int k = 0; k < n; ++k) {
      for (int q = 0; q < n; ++q) {
        for (int l = 0; l < n; ++l) {
          std::array<int, 3> ann{k, q, l};
          std::sort(ann.begin(), ann.end());
          do {
            const std::array<FermionOp, 6> ops{{{Mode{k + 1}, true},
                                                {Mode{ann[0] + 1}, false},
                                                {Mode{q + 1}, true},
                                                {Mode{ann[1] + 1}, false},
                                                {Mode{l + 1}, true},
                                                {Mode{ann[2] + 1}, false}}};
            total += coeffs.sextic(k, q, l, ann[0], ann[1], ann[2]) * monomial_trace(ops, n);
          } while (std::next_permutation(ann.begin(), ann.end()));
        }
      }
    }
  }
  return total;
}

}  // namespace jwd
