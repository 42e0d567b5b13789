#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jwdiscord/coefficients.hpp"
#include "jwdiscord/discord.hpp"

namespace jwd {

/// Pairwise discord Q_nm over all modes; symmetric with a zero diagonal.
struct DiscordMatrix {
  Eigen::MatrixXd q;

  int size() const { return static_cast<int>(q.rows()); }
  double at(Mode n, Mode m) const { return q(n.index - 1, m.index - 1); }
};

enum class ClusterRule { MiddleNodeOdd, EveryThirdExcluded };

const char* to_string(ClusterRule rule);

struct ClusterSpec {
  std::vector<int> members;  ///< sorted 1-based mode indices
  ClusterRule rule;

  bool contains(int mode) const;
};

/// The equal-discord cluster of the unperturbed single-node state, when one
/// of the two known rules applies:
///   - odd N, j0 = (N+1)/2: the odd modes;
///   - N = 5 + 6i (i >= 1), j0 = 2(i+1): every mode except multiples of 3.
std::optional<ClusterSpec> predict_cluster(int n_sites, Site j0);

struct SpreadStats {
  double cl_max = 0.0;
  double cl_min = 0.0;
  double z_max = 0.0;
  double z_min = 0.0;
};

struct SweepRecord {
  double param = 0.0;  ///< b or epsilon
  SpreadStats stats;
  std::optional<int> order;
  int n_realizations = 0;
  std::uint64_t seed = 0;
};

struct RunOptions {
  int threads = 1;
  /// Evaluation time; the discord does not depend on it.
  double t = 0.0;
  /// Check t-invariance of this many sampled pairs per discord matrix.
  int stationarity_samples = 3;
};

/// reduce_pair + assemble_x + discord_pair for every n < m, then a spot
/// check that sampled pairs give the same discord at other times.
DiscordMatrix discord_matrix(const CoeffSet& coeffs, const RunOptions& options = {});

/// Extrema over pairs inside the cluster (cl) and pairs with at least one
/// mode outside it (z).
SpreadStats spread_stats(const DiscordMatrix& qm, const ClusterSpec& cluster);

/// Three-node state with b_{j0 +- 1} = b, b_{j0} = b_j0.
CoeffSet parasitic_state(SpectralPtr spec, Site j0, double b_j0, double b);

struct CriticalPoint {
  double root = 0.0;
  int crossings = 0;  ///< sign changes seen on the scan grid; > 1 means the smallest root was taken
};

/// Smallest root of f on [lo, hi]: scan `points` uniform samples, then bisect
/// the first sign change until the bracket is narrower than `tol`.
CriticalPoint find_first_root(const std::function<double(double)>& f, double lo, double hi, int points,
                              double tol = 1e-6);

/// Same, starting from already evaluated samples fs[i] = f(xs[i]) on an
/// increasing grid.
CriticalPoint refine_first_root(const std::function<double(double)>& f, const std::vector<double>& xs,
                                const std::vector<double>& fs, double tol = 1e-6);

/// Intersection of cl_min(b) and z_max(b) for the parasitic-polarization
/// family on [0, b_hi].
CriticalPoint find_b_critical(SpectralPtr spec, Site j0, double b_j0, double b_hi, int points = 97,
                              const RunOptions& options = {});

/// Spread statistics at `points` uniform values of b on [0, b_max].
std::vector<SweepRecord> sweep_b(SpectralPtr spec, Site j0, double b_j0, double b_max, int points,
                                 const RunOptions& options = {});

/// Entrywise mean of the discord matrices of n_real noise realizations.
DiscordMatrix averaged_noise_matrix(SpectralPtr spec, Site j0, double b_j0, double epsilon, int n_real,
                                    std::uint64_t seed, int order, const RunOptions& options = {});

std::vector<SweepRecord> noise_sweep(SpectralPtr spec, Site j0, double b_j0, const std::vector<double>& eps_list,
                                     int n_real, std::uint64_t seed, int order, const RunOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Exceptions
/// from any work unit are rethrown after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace jwd
