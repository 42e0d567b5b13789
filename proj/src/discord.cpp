#include "jwdiscord/discord.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace jwd {
namespace {

constexpr double kClipTolerance = 1e-8;
constexpr int kGridPoints = 1001;
constexpr double kGoldenTolerance = 1e-10;

double clip_nonnegative(double v, const char* what) {
  if (v < -kClipTolerance) throw std::domain_error(std::string(what) + " is negative: " + std::to_string(v));
  return std::max(v, 0.0);
}

double binary_entropy(double p0, double p1) { return entropy_term(p0) + entropy_term(p1); }

XMatrix swapped(const XMatrix& x) {
  XMatrix s = x;
  std::swap(s.r22, s.r33);
  s.r23 = std::conj(x.r23);
  return s;
}

// S(theta) for the Bloch-vector length theta of a conditional qubit state.
double bloch_entropy(double theta) {
  theta = std::clamp(theta, 0.0, 1.0);
  return binary_entropy((1 - theta) / 2, (1 + theta) / 2);
}

template <class Fn>
double golden_section(Fn&& f, double lo, double hi, double tol, double& argmin) {
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  argmin = fc < fd ? c : d;
  return std::min(fc, fd);
}

}  // namespace

double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

std::array<double, 4> eigenvalues_x(const XMatrix& x) {
  const double mean = (x.r22 + x.r33) / 2;
  const double half_gap = std::sqrt((x.r22 - x.r33) * (x.r22 - x.r33) + 4 * std::norm(x.r23)) / 2;
  return {clip_nonnegative(x.r11, "eigenvalue"), clip_nonnegative(x.r44, "eigenvalue"),
          clip_nonnegative(mean + half_gap, "eigenvalue"), clip_nonnegative(mean - half_gap, "eigenvalue")};
}

double mutual_information(const XMatrix& x) {
  const double s_first = binary_entropy(x.r11 + x.r22, x.r33 + x.r44);
  const double s_second = binary_entropy(x.r11 + x.r33, x.r22 + x.r44);
  double joint = 0.0;
  for (double l : eigenvalues_x(x)) joint += entropy_term(l);
  return s_first + s_second - joint;
}

double conditional_entropy(const XMatrix& x, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw std::domain_error("measurement parameter k outside [0, 1]");
  const double l = 1.0 - k;
  const double off = 4 * k * l * std::norm(x.r23);
  const double p0 = (x.r11 + x.r33) * k + (x.r22 + x.r44) * l;
  const double p1 = (x.r11 + x.r33) * l + (x.r22 + x.r44) * k;
  double total = 0.0;
  if (p0 > 0.0) {
    const double d0 = (x.r11 - x.r33) * k + (x.r22 - x.r44) * l;
    total += p0 * bloch_entropy(std::sqrt(d0 * d0 + off) / p0);
  }
  if (p1 > 0.0) {
    const double d1 = (x.r11 - x.r33) * l + (x.r22 - x.r44) * k;
    total += p1 * bloch_entropy(std::sqrt(d1 * d1 + off) / p1);
  }
  return total;
}

Correlation classical_correlation(const XMatrix& x, Direction direction) {
  const XMatrix y = direction == Direction::M ? x : swapped(x);
  auto f = [&](double k) { return conditional_entropy(y, k); };

  int best = 0;
  double best_value = f(0.0);
  for (int i = 1; i < kGridPoints; ++i) {
    const double v = f(static_cast<double>(i) / (kGridPoints - 1));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double step = 1.0 / (kGridPoints - 1);
  const double lo = std::max(0, best - 1) * step;
  const double hi = std::min(kGridPoints - 1, best + 1) * step;
  double k_star = best * step;
  double refined_k = k_star;
  const double refined = golden_section(f, lo, hi, kGoldenTolerance, refined_k);
  if (refined < best_value) {
    best_value = refined;
    k_star = refined_k;
  }
  const double s_unmeasured = binary_entropy(y.r11 + y.r22, y.r33 + y.r44);
  return {s_unmeasured - best_value, k_star};
}

DiscordResult discord_pair(const XMatrix& x) {
  const double info = mutual_information(x);
  const Correlation cm = classical_correlation(x, Direction::M);
  const Correlation cn = classical_correlation(x, Direction::N);
  DiscordResult r;
  r.q_m = clip_nonnegative(info - cm.value, "discord");
  r.q_n = clip_nonnegative(info - cn.value, "discord");
  if (r.q_n < r.q_m) {
    r.q = r.q_n;
    r.k_star = cn.k_star;
  } else {
    r.q = r.q_m;
    r.k_star = cm.k_star;
  }
  return r;
}

namespace {

using Matrix4c = Eigen::Matrix4cd;
using Matrix2c = Eigen::Matrix2cd;

double von_neumann(const Matrix2c& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) s += entropy_term(std::max(es.eigenvalues()(i), 0.0));
  return s;
}

Matrix4c dense(const XMatrix& x) {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = x.r11;
  rho(1, 1) = x.r22;
  rho(2, 2) = x.r33;
  rho(3, 3) = x.r44;
  rho(1, 2) = x.r23;
  rho(2, 1) = std::conj(x.r23);
  return rho;
}

// Index of basis state |a b> is 2a + b.
Matrix2c marginal(const Matrix4c& rho, int keep) {
  Matrix2c out = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int t = 0; t < 2; ++t)
        out(i, j) += keep == 0 ? rho(2 * i + t, 2 * j + t) : rho(2 * t + i, 2 * t + j);
  return out;
}

// Conditional entropy of the unmeasured slot after measuring `measured` in
// the basis {(cos, e^{i phi} sin), (-e^{-i phi} sin, cos)} of angle theta/2.
double measured_entropy(const Matrix4c& rho, int measured, double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const std::array<Eigen::Vector2cd, 2> basis{
      Eigen::Vector2cd(c, std::polar(s, phi)), Eigen::Vector2cd(-std::polar(s, -phi), c)};
  double total = 0.0;
  for (const auto& psi : basis) {
    Matrix2c sigma = Matrix2c::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int u = 0; u < 2; ++u)
          for (int v = 0; v < 2; ++v) {
            const int row = measured == 1 ? 2 * i + u : 2 * u + i;
            const int col = measured == 1 ? 2 * j + v : 2 * v + j;
            sigma(i, j) += std::conj(psi(u)) * rho(row, col) * psi(v);
          }
    const double p = sigma.trace().real();
    if (p > 1e-300) total += p * von_neumann(sigma / p);
  }
  return total;
}

}  // namespace

DiscordResult discord_projective_scan(const XMatrix& x, int theta_points, int phi_points) {
  if (theta_points < 3 || phi_points < 1) throw std::invalid_argument("projective scan grid too small");
  const Matrix4c rho = dense(x);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho, Eigen::EigenvaluesOnly);
  double joint = 0.0;
  for (int i = 0; i < 4; ++i) joint += entropy_term(std::max(es.eigenvalues()(i), 0.0));
  const double s_first = von_neumann(marginal(rho, 0));
  const double s_second = von_neumann(marginal(rho, 1));
  const double info = s_first + s_second - joint;

  auto scan = [&](int measured, double& theta_best) {
    double best = std::numeric_limits<double>::infinity();
    double phi_best = 0.0;
    const double dtheta = std::numbers::pi / (theta_points - 1);
    for (int p = 0; p < phi_points; ++p) {
      const double phi = 2 * std::numbers::pi * p / phi_points;
      for (int i = 0; i < theta_points; ++i) {
        const double v = measured_entropy(rho, measured, i * dtheta, phi);
        if (v < best) {
          best = v;
          theta_best = i * dtheta;
          phi_best = phi;
        }
      }
    }
    const double lo = std::max(0.0, theta_best - dtheta);
    const double hi = std::min(std::numbers::pi, theta_best + dtheta);
    double arg = theta_best;
    const double refined = golden_section([&](double th) { return measured_entropy(rho, measured, th, phi_best); },
                                          lo, hi, 1e-12, arg);
    if (refined < best) {
      best = refined;
      theta_best = arg;
    }
    return best;
  };

  double theta_m = 0.0, theta_n = 0.0;
  // Measuring the second slot leaves the first one: C = S(first) - min H.
  const double q_m = info - (s_first - scan(1, theta_m));
  const double q_n = info - (s_second - scan(0, theta_n));
  DiscordResult r;
  r.q_m = std::max(q_m, 0.0);
  r.q_n = std::max(q_n, 0.0);
  const bool n_wins = r.q_n < r.q_m;
  r.q = n_wins ? r.q_n : r.q_m;
  const double th = n_wins ? theta_n : theta_m;
  r.k_star = std::cos(th / 2) * std::cos(th / 2);
  return r;
}

}  // namespace jwd
