#include "gkpforge/electron.hpp"

#include <cmath>

namespace gkpforge {

namespace {

void require_window(int window) {
  if (window < 1) throw Error("electron window half-width must be >= 1");
}

}  // namespace

cplx ElectronComb::at(int ladder_index) const {
  const int i = ladder_index - first_index();
  if (i < 0 || i >= amplitudes.size()) return 0.0;
  return amplitudes[i];
}

std::vector<double> ElectronComb::peak_phases() const {
  std::vector<double> out;
  for (int n : occupied_indices()) out.push_back(std::arg(at(n)));
  return out;
}

std::vector<int> ElectronComb::occupied_indices(double threshold) const {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    if (std::abs(amplitudes[i]) > threshold) out.push_back(first_index() + static_cast<int>(i));
  }
  return out;
}

ElectronComb ideal_comb(int spacing, int shift, int window) {
  require_window(window);
  if (spacing < 1) throw Error("comb spacing must be >= 1");
  ElectronComb comb;
  comb.spacing = spacing;
  comb.center_offset = shift;
  comb.window = window;
  comb.amplitudes = CVector::Zero(comb.size());
  int count = 0;
  for (int n = comb.first_index(); n <= comb.last_index(); ++n) {
    if ((n - shift) % spacing == 0) ++count;
  }
  const double a = 1.0 / std::sqrt(static_cast<double>(count));
  for (int n = comb.first_index(); n <= comb.last_index(); ++n) {
    if ((n - shift) % spacing == 0) comb.amplitudes[n - comb.first_index()] = a;
  }
  return comb;
}

ElectronComb gaussian_comb(int spacing, double sigma, int window, int center_offset) {
  require_window(window);
  if (spacing < 1) throw Error("comb spacing must be >= 1");
  if (!(sigma > 0.0)) throw Error("Gaussian comb needs sigma > 0");
  ElectronComb comb;
  comb.spacing = spacing;
  comb.envelope = {EnvelopeKind::kGaussian, sigma};
  comb.center_offset = center_offset;
  comb.window = window;
  comb.amplitudes = CVector::Zero(comb.size());

  auto weight = [&](int offset) {
    const double d = static_cast<double>(offset);
    return std::exp(-d * d / (2.0 * sigma * sigma));
  };
  double inside = 0.0;
  for (int j = -(window / spacing); j <= window / spacing; ++j) {
    const int offset = j * spacing;
    const double amp = std::sqrt(weight(offset));
    comb.amplitudes[window + offset] = amp;
    inside += amp * amp;
  }
  double outside = 0.0;
  for (int j = window / spacing + 1;; ++j) {
    const double w = weight(j * spacing);
    outside += 2.0 * w;
    if (w < 1e-300 || w < 1e-18 * outside) break;
  }
  comb.amplitudes /= std::sqrt(inside);
  comb.truncated_weight = outside / (inside + outside);
  comb.window_converged =
      window >= 4.0 * sigma / spacing && comb.truncated_weight < kDefaultLeakTolerance;
  return comb;
}

ElectronComb single_peak(int index, int window) {
  require_window(window);
  ElectronComb comb;
  comb.spacing = 1;
  comb.center_offset = index;
  comb.window = window;
  comb.amplitudes = CVector::Zero(comb.size());
  comb.amplitudes[window] = 1.0;
  comb.envelope = {EnvelopeKind::kSingle, 0.0};
  return comb;
}

ElectronComb lower_ladder(const ElectronComb& comb, int steps) {
  ElectronComb out = comb;
  out.amplitudes.setZero();
  for (Eigen::Index i = 0; i < comb.amplitudes.size(); ++i) {
    const Eigen::Index j = i - steps;
    if (j >= 0 && j < out.amplitudes.size()) out.amplitudes[j] = comb.amplitudes[i];
  }
  return out;
}

PhaseProfile explicit_profile(int first_index, std::vector<double> phases) {
  PhaseProfile p;
  p.model = PhaseModel::kExplicit;
  p.first_index = first_index;
  p.phases = std::move(phases);
  return p;
}

PhaseProfile quadratic_profile(double beta, double z, int first_index, int count) {
  PhaseProfile p;
  p.model = PhaseModel::kQuadratic;
  p.first_index = first_index;
  p.beta = beta;
  p.z = z;
  p.phases.resize(count);
  for (int i = 0; i < count; ++i) {
    const double n = first_index + i;
    p.phases[i] = -beta * n * n * z;
  }
  return p;
}

double dispersion_beta(const DispersionParams& params) {
  constexpr double kHbar = 1.054571817e-34;
  constexpr double kElectronMass = 9.1093837015e-31;
  constexpr double kLightSpeed = 299792458.0;
  constexpr double kElementaryCharge = 1.602176634e-19;
  const double rest = kElectronMass * kLightSpeed * kLightSpeed;
  const double gamma = 1.0 + params.kinetic_energy_ev * kElementaryCharge / rest;
  const double v = kLightSpeed * std::sqrt(1.0 - 1.0 / (gamma * gamma));
  const double omega = params.photon_energy_ev * kElementaryCharge / kHbar;
  return kHbar * omega * omega / (2.0 * kElectronMass * v * v * v * gamma * gamma * gamma);
}

ElectronComb apply_phase_profile(const ElectronComb& comb, const PhaseProfile& profile) {
  const int last = profile.first_index + static_cast<int>(profile.phases.size()) - 1;
  ElectronComb out = comb;
  for (int n = comb.first_index(); n <= comb.last_index(); ++n) {
    const cplx c = comb.at(n);
    if (c == 0.0) continue;
    if (n < profile.first_index || n > last) {
      throw Error("phase profile does not cover the occupied comb window");
    }
    out.amplitudes[n - comb.first_index()] =
        c * std::polar(1.0, profile.phases[n - profile.first_index]);
  }
  return out;
}

CVector fourier_profile(const ElectronComb& comb, int theta_samples) {
  if (theta_samples < 1) throw Error("theta_samples must be positive");
  CVector psi = CVector::Zero(theta_samples);
  for (int j = 0; j < theta_samples; ++j) {
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < comb.amplitudes.size(); ++i) {
      if (comb.amplitudes[i] == 0.0) continue;
      const long n = comb.first_index() + static_cast<long>(i);
      // Reduce n theta modulo 2 pi exactly through the integer index.
      const long r = ((n * j) % theta_samples + theta_samples) % theta_samples;
      acc += comb.amplitudes[i] * std::polar(1.0, 2.0 * kPi * r / theta_samples);
    }
    psi[j] = acc;
  }
  return psi;
}

CVector inverse_fourier_profile(const CVector& psi, int first_index, int count) {
  const long m = psi.size();
  CVector c = CVector::Zero(count);
  for (int i = 0; i < count; ++i) {
    const long n = first_index + i;
    cplx acc = 0.0;
    for (long j = 0; j < m; ++j) {
      const long r = ((n * j) % m + m) % m;
      acc += psi[j] * std::polar(1.0, -2.0 * kPi * r / m);
    }
    c[i] = acc / static_cast<double>(m);
  }
  return c;
}

}  // namespace gkpforge
