#pragma once

#include <array>

#include "jwdiscord/reduction.hpp"

namespace jwd {

/// Which party of the X-matrix carries the projective measurement:
/// `M` measures the second basis slot (the conditional-entropy formulas as
/// written), `N` the first slot, obtained from `M` by exchanging r22 and r33.
enum class Direction { N, M };

struct DiscordResult {
  double q_n = 0.0;
  double q_m = 0.0;
  double q = 0.0;       ///< min(q_n, q_m)
  double k_star = 0.0;  ///< minimizing measurement parameter for the reported direction
};

struct Correlation {
  double value = 0.0;
  double k_star = 0.0;
};

/// Binary-log entropy contribution -p log2 p with 0 log 0 = 0.
double entropy_term(double p);

/// (r11, r44, lambda_+, lambda_-) of the central 2x2 block; clipped at 0.
std::array<double, 4> eigenvalues_x(const XMatrix& x);

double mutual_information(const XMatrix& x);

/// p0 S(theta0) + p1 S(theta1) for the one-parameter measurement family
/// with k + l = 1, measuring the second slot. k must lie in [0, 1].
double conditional_entropy(const XMatrix& x, double k);

/// S(unmeasured marginal) minus the minimal conditional entropy over k,
/// found by a 1001-point grid followed by golden-section refinement.
Correlation classical_correlation(const XMatrix& x, Direction direction);

DiscordResult discord_pair(const XMatrix& x);

/// Independent cross-check: discord from explicit post-measurement states
/// over a dense (theta, phi) grid of projective measurements with local
/// golden-section refinement in theta. Returns the same fields as
/// discord_pair (k_star reports cos^2(theta/2) of the best measurement).
DiscordResult discord_projective_scan(const XMatrix& x, int theta_points = 2001, int phi_points = 8);

}  // namespace jwd
