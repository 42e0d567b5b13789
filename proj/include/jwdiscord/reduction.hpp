#pragma once

#include <complex>

#include "jwdiscord/coefficients.hpp"

namespace jwd {

/// Time-independent coefficients of the two-mode marginal
///
///   rho_nm(t) = B + sum_{k,k' in {n,m}} B_kk' e^{-it(eps_k - eps_k')} b+_k b_k' + C b+_n b+_m b_m b_n
///
/// already divided by the trace of the full operator.
struct ReducedCoeffs {
  Mode n{0};
  Mode m{0};
  double b = 0.0;
  double b_nn = 0.0;
  double b_mm = 0.0;
  double b_nm = 0.0;  ///< coefficient of b+_n b_m
  double b_mn = 0.0;  ///< coefficient of b+_m b_n
  double c = 0.0;
};

/// Two-mode X-type density matrix in the basis |00>, |01>, |10>, |11>, where
/// the second slot is the occupation of mode n and the first slot that of
/// mode m. Only r23 = <01|rho|10> is off-diagonal.
struct XMatrix {
  double r11 = 0.25;
  double r22 = 0.25;
  double r33 = 0.25;
  double r44 = 0.25;
  std::complex<double> r23{0.0, 0.0};

  double trace() const { return r11 + r22 + r33 + r44; }
  /// Throws unless the trace is 1 and the matrix is positive semidefinite
  /// within the given slack.
  void validate(double tol = 1e-10) const;
};

/// Contract the coefficient set to modes n and m by summing its canonic-form
/// monomials over the other N-2 modes.
ReducedCoeffs reduce_pair(const CoeffSet& coeffs, Mode n, Mode m);

/// Matrix form of the reduced coefficients at time t.
XMatrix assemble_x(const ReducedCoeffs& red, const SpectralData& spec, double t);

}  // namespace jwd
