#include "jwdiscord/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "jwdiscord/reduction.hpp"

namespace jwd {

const char* to_string(ClusterRule rule) {
  switch (rule) {
    case ClusterRule::MiddleNodeOdd: return "middle-node-odd";
    case ClusterRule::EveryThirdExcluded: return "every-third-excluded";
  }
  return "unknown";
}

bool ClusterSpec::contains(int mode) const { return std::binary_search(members.begin(), members.end(), mode); }

std::optional<ClusterSpec> predict_cluster(int n_sites, Site j0) {
  if (n_sites % 2 == 1 && j0.index == (n_sites + 1) / 2) {
    ClusterSpec cl{{}, ClusterRule::MiddleNodeOdd};
    for (int k = 1; k <= n_sites; k += 2) cl.members.push_back(k);
    return cl;
  }
  if (n_sites >= 11 && (n_sites - 5) % 6 == 0) {
    const int i = (n_sites - 5) / 6;
    if (j0.index == 2 * (i + 1)) {
      ClusterSpec cl{{}, ClusterRule::EveryThirdExcluded};
      for (int k = 1; k <= n_sites; ++k)
        if (k % 3 != 0) cl.members.push_back(k);
      return cl;
    }
  }
  return std::nullopt;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

constexpr std::array<double, 4> kAlternateTimes{0.7, 1.3, 5.1, 23.7};
constexpr double kStationarityTolerance = 1e-10;

void check_stationarity(const CoeffSet& coeffs, const DiscordMatrix& qm, int samples) {
  const int n = coeffs.size();
  std::mt19937 gen(static_cast<unsigned>(n));
  std::uniform_int_distribution<int> pick(1, n);
  std::uniform_int_distribution<int> pick_t(0, static_cast<int>(kAlternateTimes.size()) - 1);
  for (int s = 0; s < samples; ++s) {
    int a = pick(gen), b = pick(gen);
    while (b == a) b = pick(gen);
    const double t = kAlternateTimes[pick_t(gen)];
    const XMatrix x = assemble_x(reduce_pair(coeffs, Mode{a}, Mode{b}), coeffs.spectral(), t);
    const double q = discord_pair(x).q;
    if (std::abs(q - qm.at(Mode{a}, Mode{b})) > kStationarityTolerance) {
      std::ostringstream msg;
      msg << "discord of pair (" << a << "," << b << ") changed with time: " << qm.at(Mode{a}, Mode{b}) << " vs "
          << q << " at t=" << t;
      throw std::runtime_error(msg.str());
    }
  }
}

}  // namespace

DiscordMatrix discord_matrix(const CoeffSet& coeffs, const RunOptions& options) {
  const int n = coeffs.size();
  std::vector<std::pair<int, int>> pairs;
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) pairs.emplace_back(a, b);

  std::vector<double> values(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), options.threads, [&](int i) {
    const auto [a, b] = pairs[i];
    const XMatrix x = assemble_x(reduce_pair(coeffs, Mode{a}, Mode{b}), coeffs.spectral(), options.t);
    x.validate(1e-9);
    values[i] = discord_pair(x).q;
  });

  DiscordMatrix qm{Eigen::MatrixXd::Zero(n, n)};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    qm.q(a - 1, b - 1) = qm.q(b - 1, a - 1) = values[i];
  }
  check_stationarity(coeffs, qm, options.stationarity_samples);
  return qm;
}

SpreadStats spread_stats(const DiscordMatrix& qm, const ClusterSpec& cluster) {
  const int n = qm.size();
  if (cluster.members.size() < 2) throw std::invalid_argument("cluster needs at least two members");
  if (static_cast<int>(cluster.members.size()) >= n)
    throw std::invalid_argument("cluster must be a strict subset of the modes");
  for (int k : cluster.members)
    if (k < 1 || k > n) throw std::out_of_range("cluster member outside 1..N");

  constexpr double inf = std::numeric_limits<double>::infinity();
  SpreadStats s{-inf, inf, -inf, inf};
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) {
      const double v = qm.q(a - 1, b - 1);
      if (cluster.contains(a) && cluster.contains(b)) {
        s.cl_max = std::max(s.cl_max, v);
        s.cl_min = std::min(s.cl_min, v);
      } else {
        s.z_max = std::max(s.z_max, v);
        s.z_min = std::min(s.z_min, v);
      }
    }
  return s;
}

CoeffSet parasitic_state(SpectralPtr spec, Site j0, double b_j0, double b) {
  return three_node_coeffs(std::move(spec), j0, b, b_j0, b);
}

CriticalPoint find_first_root(const std::function<double(double)>& f, double lo, double hi, int points, double tol) {
  if (points < 2) throw std::invalid_argument("root scan needs at least two points");
  if (!(hi > lo)) throw std::invalid_argument("root bracket is empty");
  std::vector<double> xs(points), fs(points);
  for (int i = 0; i < points; ++i) {
    xs[i] = lo + (hi - lo) * i / (points - 1);
    fs[i] = f(xs[i]);
  }
  return refine_first_root(f, xs, fs, tol);
}

CriticalPoint refine_first_root(const std::function<double(double)>& f, const std::vector<double>& xs,
                                const std::vector<double>& fs, double tol) {
  if (xs.size() != fs.size() || xs.size() < 2) throw std::invalid_argument("root scan needs at least two samples");
  const int points = static_cast<int>(xs.size());
  CriticalPoint out;
  int first = -1;
  // An exact zero on the grid counts once, at the interval it starts.
  for (int i = 0; i + 1 < points; ++i) {
    const bool ends_at_zero = fs[i + 1] == 0.0 && i + 2 == points;
    if (fs[i] == 0.0 || ends_at_zero || (fs[i + 1] != 0.0 && (fs[i] > 0) != (fs[i + 1] > 0))) {
      if (first < 0) first = i;
      ++out.crossings;
    }
  }
  if (first < 0) {
    std::ostringstream msg;
    msg << "no sign change on [" << xs.front() << ", " << xs.back() << "]";
    throw std::runtime_error(msg.str());
  }
  double a = xs[first], b = xs[first + 1];
  double fa = fs[first];
  if (fa == 0.0) {
    out.root = a;
    return out;
  }
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) {
      a = b = mid;
      break;
    }
    if ((fm > 0) == (fa > 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  out.root = 0.5 * (a + b);
  return out;
}

namespace {

ClusterSpec require_cluster(const SpectralData& spec, Site j0) {
  auto cl = predict_cluster(spec.size(), j0);
  if (!cl) {
    std::ostringstream msg;
    msg << "no known cluster for N=" << spec.size() << ", j0=" << j0.index;
    throw std::invalid_argument(msg.str());
  }
  return *cl;
}

}  // namespace

CriticalPoint find_b_critical(SpectralPtr spec, Site j0, double b_j0, double b_hi, int points,
                              const RunOptions& options) {
  const ClusterSpec cl = require_cluster(*spec, j0);
  auto f = [&](double b) {
    const SpreadStats s = spread_stats(discord_matrix(parasitic_state(spec, j0, b_j0, b), options), cl);
    return s.cl_min - s.z_max;
  };
  return find_first_root(f, 0.0, b_hi, points);
}

std::vector<SweepRecord> sweep_b(SpectralPtr spec, Site j0, double b_j0, double b_max, int points,
                                 const RunOptions& options) {
  if (points < 1) throw std::invalid_argument("sweep needs at least one point");
  const ClusterSpec cl = require_cluster(*spec, j0);
  std::vector<SweepRecord> rows(points);
  RunOptions inner = options;
  inner.threads = 1;
  parallel_for(points, options.threads, [&](int i) {
    const double b = points == 1 ? 0.0 : b_max * i / (points - 1);
    rows[i].param = b;
    rows[i].stats = spread_stats(discord_matrix(parasitic_state(spec, j0, b_j0, b), inner), cl);
  });
  return rows;
}

DiscordMatrix averaged_noise_matrix(SpectralPtr spec, Site j0, double b_j0, double epsilon, int n_real,
                                    std::uint64_t seed, int order, const RunOptions& options) {
  if (n_real < 1) throw std::invalid_argument("need at least one noise realization");
  const int n = spec->size();
  std::vector<Eigen::MatrixXd> per(n_real);
  RunOptions inner = options;
  inner.threads = 1;
  parallel_for(n_real, options.threads, [&](int r) {
    try {
      const NoiseRealization noise = draw_noise(n, epsilon, seed, r);
      per[r] = discord_matrix(noise_coeffs(spec, j0, b_j0, noise, order), inner).q;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "noise realization " << r << " (epsilon=" << epsilon << ", seed=" << seed << ", order=" << order
          << ") failed: " << e.what();
      throw std::runtime_error(msg.str());
    }
  });
  // Fixed summation order keeps the mean independent of the thread count.
  DiscordMatrix mean{Eigen::MatrixXd::Zero(n, n)};
  for (const auto& q : per) mean.q += q;
  mean.q /= n_real;
  return mean;
}

std::vector<SweepRecord> noise_sweep(SpectralPtr spec, Site j0, double b_j0, const std::vector<double>& eps_list,
                                     int n_real, std::uint64_t seed, int order, const RunOptions& options) {
  const ClusterSpec cl = require_cluster(*spec, j0);
  std::vector<SweepRecord> rows;
  for (double eps : eps_list) {
    SweepRecord rec;
    rec.param = eps;
    rec.stats = spread_stats(averaged_noise_matrix(spec, j0, b_j0, eps, n_real, seed, order, options), cl);
    rec.order = order;
    rec.n_realizations = n_real;
    rec.seed = seed;
    rows.push_back(rec);
  }
  return rows;
}

}  // namespace jwd
