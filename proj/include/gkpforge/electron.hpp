#pragma once

#include <vector>

#include "gkpforge/fock.hpp"

namespace gkpforge {

enum class EnvelopeKind { kIdeal, kGaussian, kSingle };

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::kIdeal;
  double sigma = 0.0;  // std of |c_n|^2 in units of the photon energy
};

/// Electron wavefunction on the energy ladder, stored over the window
/// [center_offset - window, center_offset + window]. Index n means an energy
/// E0 + n * hbar omega.
struct ElectronComb {
  int spacing = 1;
  Envelope envelope;
  int center_offset = 0;
  int window = 0;
  CVector amplitudes;
  /// Weight of the untruncated envelope that falls outside the window.
  double truncated_weight = 0.0;
  bool window_converged = true;

  int first_index() const { return center_offset - window; }
  int last_index() const { return center_offset + window; }
  int size() const { return 2 * window + 1; }
  cplx at(int ladder_index) const;
  /// Phases of the occupied peaks, in ladder order.
  std::vector<double> peak_phases() const;
  std::vector<int> occupied_indices(double threshold = 0.0) const;
};

ElectronComb ideal_comb(int spacing, int shift, int window);
/// Peaks at center + j N with amplitude exp(-(jN)^2 / (4 sigma^2)).
ElectronComb gaussian_comb(int spacing, double sigma, int window, int center_offset = 0);
/// A single ladder state, c_n = delta_{n, index}.
ElectronComb single_peak(int index, int window);

/// b^steps: every amplitude moves `steps` indices down the ladder. Amplitudes
/// pushed past the window edge are dropped.
ElectronComb lower_ladder(const ElectronComb& comb, int steps);

enum class PhaseModel { kExplicit, kQuadratic };

struct PhaseProfile {
  PhaseModel model = PhaseModel::kExplicit;
  int first_index = 0;
  std::vector<double> phases;
  double beta = 0.0;  // rad / index^2 / m
  double z = 0.0;     // m
};

PhaseProfile explicit_profile(int first_index, std::vector<double> phases);
/// phi_n = -beta n^2 z over the ladder indices [first, first + count).
PhaseProfile quadratic_profile(double beta, double z, int first_index, int count);

struct DispersionParams {
  double photon_energy_ev = 1.55;
  double kinetic_energy_ev = 200e3;
};

/// beta = hbar omega^2 / (2 m_e v^3 gamma^3) in rad per index^2 per metre.
double dispersion_beta(const DispersionParams& params);

ElectronComb apply_phase_profile(const ElectronComb& comb, const PhaseProfile& profile);

/// psi(theta_j) = sum_n c_n e^{i n theta_j}, theta_j = 2 pi j / samples.
/// With samples >= size(), (1/samples) sum_j |psi_j|^2 = ||c||^2.
CVector fourier_profile(const ElectronComb& comb, int theta_samples);
/// Recovers c_n over the comb window from fourier_profile samples.
CVector inverse_fourier_profile(const CVector& psi, int first_index, int count);

}  // namespace gkpforge
