#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gkpforge/errors.hpp"

namespace gkpforge {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultLeakTolerance = 1e-10;

/// Pure single-mode state on the truncated Fock basis {|0>, ..., |cutoff>}.
///
/// `norm_leak` records the population that the truncation discarded while
/// the state was built (1 - sum |c_n|^2 for analytically known states).
struct PhotonState {
  CVector amplitudes;
  double norm_leak = 0.0;

  PhotonState() = default;
  explicit PhotonState(CVector amps, double leak = 0.0)
      : amplitudes(std::move(amps)), norm_leak(leak) {}

  int cutoff() const { return static_cast<int>(amplitudes.size()) - 1; }
  double norm() const { return amplitudes.norm(); }
  bool converged(double tol = kDefaultLeakTolerance) const {
    return norm_leak <= tol;
  }

  /// Throws ZeroNormError when the state has no weight.
  PhotonState normalized() const;
  /// Zero-pads (or truncates, accumulating leak) to a new cutoff.
  PhotonState resized(int new_cutoff) const;
  double mean_photon_number() const;
};

struct OperatorMatrix {
  CMatrix entries;
  std::string label;

  int dim() const { return static_cast<int>(entries.rows()); }
  PhotonState apply(const PhotonState& s) const;
};

struct SqueezeParams {
  double r = 0.0;
  double theta = 0.0;
  cplx xi() const { return std::polar(r, theta); }
};

/// Real-valued samples on a rectangular (x, p) grid. `values(i, j)` is the
/// value at (x[j], p[i]) so that rows run along p.
struct WignerGrid {
  std::vector<double> x;
  std::vector<double> p;
  Eigen::MatrixXd values;

  double integral() const;
};

struct GridSpec {
  double x_min = -6.0, x_max = 6.0;
  double p_min = -6.0, p_max = 6.0;
  int nx = 121, np = 121;

  std::vector<double> x_axis() const;
  std::vector<double> p_axis() const;
  double dx() const { return nx > 1 ? (x_max - x_min) / (nx - 1) : 0.0; }
  double dp() const { return np > 1 ? (p_max - p_min) / (np - 1) : 0.0; }
};

// State construction ---------------------------------------------------------

PhotonState vacuum(int cutoff);
PhotonState fock_state(int n, int cutoff);
PhotonState make_coherent(cplx alpha, int cutoff);
/// S(xi)|0> from its closed-form even-Fock expansion.
PhotonState make_squeezed_vacuum(const SqueezeParams& params, int cutoff);

/// Smallest cutoff the coherent-state heuristic accepts for amplitude |alpha|.
int coherent_cutoff(double abs_alpha);
/// Cutoff that holds D(alpha) applied to anything supported on n <= max_n.
int safe_cutoff(int max_n, double abs_alpha);

// Operators ------------------------------------------------------------------

CMatrix annihilation(int cutoff);
CMatrix creation(int cutoff);
CMatrix number_operator(int cutoff);

/// Matrix exponential by scaling and squaring of a truncated Taylor series;
/// the squaring count brings the scaled 1-norm below 0.5.
CMatrix expm(const CMatrix& generator);

/// D(alpha) from closed-form (Laguerre) matrix elements.
OperatorMatrix make_displacement(cplx alpha, int cutoff);
/// D(alpha) as expm(alpha a^dagger - alpha^* a) on the truncated space.
OperatorMatrix make_displacement_expm(cplx alpha, int cutoff);
/// S(xi) = expm(xi^*/2 a^2 - xi/2 a^dagger^2) on the truncated space.
OperatorMatrix make_squeeze(const SqueezeParams& params, int cutoff);
/// R(phi) = exp(i phi a^dagger a), diagonal.
CVector rotation_phases(double phi, int cutoff);

/// Displacement matrix with closed-form elements, rotated from the real
/// amplitude |alpha|. Repeated phases of the same magnitude reuse `base`.
CMatrix rotate_displacement(const CMatrix& real_displacement, double phase);

/// Photon-number parity operator applied elementwise: (-1)^n c_n.
CVector parity_applied(const CVector& amplitudes);

// Measures -------------------------------------------------------------------

/// Pure-state fidelity |<a|b>|^2 after normalising both; the smaller state is
/// zero-padded. Throws ZeroNormError for a zero vector.
double fidelity(const PhotonState& a, const PhotonState& b);
cplx overlap(const PhotonState& a, const PhotonState& b);

/// Normalised Hermite functions h_n(x) for n = 0..cutoff at one point, with a
/// running exponent so that large n and |x| neither overflow nor underflow.
std::vector<double> hermite_functions(int cutoff, double x);

/// psi(x) = sum_n c_n e^{-i n angle} h_n(x); angle 0 is x, pi/2 is p.
std::vector<cplx> quadrature_wavefunction(const PhotonState& state,
                                          double angle,
                                          std::span<const double> grid);

/// W(x, p) = (1/pi) <psi| D(2 beta) Pi |psi>, beta = (x + i p)/sqrt 2, so that
/// the integral over dx dp is 1.
WignerGrid wigner(const PhotonState& state, const GridSpec& grid);
double wigner_at(const PhotonState& state, double x, double p);

/// <x> and Var(x) along the rotated quadrature, from Fock-space moments.
double quadrature_mean(const PhotonState& state, double angle);
double quadrature_variance(const PhotonState& state, double angle);

}  // namespace gkpforge
