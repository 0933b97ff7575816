#include "lambdamem/model.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdamem {

namespace {
constexpr double kLn2 = 0.69314718055994531;
}

double pulse_envelope(const PulseSpec& spec, double t) {
  const double u = t - spec.center;
  switch (spec.shape) {
    case PulseShape::gaussian:
      // amplitude² = exp(−4ln2·u²/w²) → intensity FWHM = w
      return spec.peak_amplitude * std::exp(-2.0 * kLn2 * u * u / (spec.fwhm * spec.fwhm));
    case PulseShape::double_exponential:
      // exp(−π·Δν·|u|) written in terms of its intensity FWHM w = ln2/(π·Δν)
      return spec.peak_amplitude * std::exp(-kLn2 * std::abs(u) / spec.fwhm);
    case PulseShape::flat_top: {
      // order-8 super-Gaussian; quasi-rectangular with smooth shoulders
      const double v = 2.0 * u / spec.fwhm;
      const double v2 = v * v;
      const double v8 = v2 * v2 * v2 * v2;
      return spec.peak_amplitude * std::exp(-0.5 * kLn2 * v8);
    }
  }
  return 0.0;
}

double pulse_energy(const PulseSpec& spec) {
  const double a2 = spec.peak_amplitude * spec.peak_amplitude;
  switch (spec.shape) {
    case PulseShape::gaussian:
      // ∫exp(−4ln2·t²/w²)dt = w·sqrt(π/(4ln2))
      return a2 * spec.fwhm * std::sqrt(kPi / (4.0 * kLn2));
    case PulseShape::double_exponential:
      // ∫exp(−2ln2·|t|/w)dt = w/ln2
      return a2 * spec.fwhm / kLn2;
    case PulseShape::flat_top:
      // ∫exp(−ln2·(2t/w)⁸)dt = w·Γ(9/8)·(ln2)^(−1/8)
      return a2 * spec.fwhm * std::tgamma(9.0 / 8.0) * std::pow(kLn2, -0.125);
  }
  return 0.0;
}

PulseSpec photon_normalized(PulseSpec spec) {
  PulseSpec unit = spec;
  unit.peak_amplitude = 1.0;
  spec.peak_amplitude = 1.0 / std::sqrt(pulse_energy(unit));
  return spec;
}

double fwhm_from_lorentzian_bandwidth(double bandwidth_mhz) {
  if (bandwidth_mhz <= 0.0) throw std::domain_error("bandwidth must be positive");
  return 1e3 * kLn2 / (kPi * bandwidth_mhz);
}

double derive_doppler_sigma(double temperature_c, double atomic_mass_amu,
                            double wavelength_nm) {
  if (atomic_mass_amu <= 0.0) throw std::domain_error("atomic mass must be positive");
  if (wavelength_nm <= 0.0) throw std::domain_error("wavelength must be positive");
  const double t_kelvin = temperature_c + 273.15;
  if (t_kelvin < 0.0) throw std::domain_error("temperature below absolute zero");
  const double sigma_v = std::sqrt(kBoltzmannJPerK * t_kelvin /
                                   (atomic_mass_amu * kAmuKg)); // m/s
  const double k = kTwoPi / (wavelength_nm * 1e-9);             // rad/m
  return k * sigma_v * 1e-9;                                    // rad/ns
}

std::string to_string(PulseShape shape) {
  switch (shape) {
    case PulseShape::gaussian: return "gaussian";
    case PulseShape::double_exponential: return "double_exponential";
    case PulseShape::flat_top: return "flat_top";
  }
  return "gaussian";
}

PulseShape pulse_shape_from_string(const std::string& name) {
  if (name == "gaussian") return PulseShape::gaussian;
  if (name == "double_exponential") return PulseShape::double_exponential;
  if (name == "flat_top") return PulseShape::flat_top;
  throw std::invalid_argument("unknown pulse shape: " + name);
}

ExperimentConfig default_experiment_config() { return ExperimentConfig{}; }

}  // namespace lambdamem
