#pragma once

#include <string>

#include "lambdamem/units.hpp"

// Domain types for a four-level Λ storage scheme: one signal photon couples the
// populated ground state to two excited hyperfine states |e1>, |e2>; a strong
// control field couples both to the empty ground state. The two storage
// pathways carry opposite-sign coupling products and interfere destructively
// when far detuned.

namespace lambdamem {

// Atomic level structure: detunings, linewidths, relative coupling amplitudes.
// All angular frequencies in rad/ns.
struct LevelScheme {
  double delta_signal = 0.0;        // signal one-photon detuning from |e1>
  double delta_twophoton = 0.0;     // two-photon detuning Δ_tp = Δ_c − Δ_s
  double hyperfine_splitting = 0.0; // splitting between |e1> and |e2> (> 0)
  double gamma_rad = 0.0;           // radiative half-width of the excited states
  double gamma_coll = 0.0;          // collisional (buffer-gas) half-width
  double gamma_spin = 0.0;          // ground-state coherence decay during pulses
  double c1 = 1.0, c2 = 0.0;        // signal couplings to |e1>, |e2>; c1²+c2² = 1
  double b1 = 1.0, b2 = 0.0;        // control couplings to |e1>, |e2>

  // Homogeneous half-width of the optical coherences.
  double gamma_total() const { return gamma_rad + gamma_coll; }
  // Detunings of the two optical coherences: Δ₁ = Δ, Δ₂ = Δ − Δ_hfs.
  double delta1() const { return delta_signal; }
  double delta2() const { return delta_signal - hyperfine_splitting; }
};

// Vapor-cell, beam, and discretization parameters.
struct EnsembleConfig {
  double optical_depth = 0.0;   // resonant d on the signal transition (e^−d intensity)
  double cell_length = 0.0;     // mm
  double doppler_sigma = 0.0;   // 1σ one-photon Doppler shift, rad/ns
  double twophoton_doppler_fraction = 0.0; // residual two-photon Doppler / one-photon
  int n_velocity_classes = 1;   // Gauss–Hermite nodes (1 = Doppler-free)
  int n_rings = 1;              // transverse annuli (1 = plane wave)
  double signal_waist = 1.0;    // 1/e² intensity radius, µm
  double control_waist = 1.0;   // 1/e² intensity radius, µm
  int n_z = 8;                  // spatial collocation points
  double dt = 0.01;             // time step, ns
  double memory_lifetime = 0.0; // 1/e decay time of the retrieval efficiency, ns
};

enum class PulseShape { gaussian, double_exponential, flat_top };

// Temporal envelope. `fwhm` always refers to the INTENSITY envelope, matching
// how pulse durations are quoted experimentally.
struct PulseSpec {
  PulseShape shape = PulseShape::gaussian;
  double peak_amplitude = 0.0; // control: peak Rabi frequency Ω, rad/ns; signal: dimensionless
  double fwhm = 1.0;           // intensity FWHM, ns
  double center = 0.0;         // ns
};

// Real-valued field amplitude at time t (all supported shapes are unchirped).
double pulse_envelope(const PulseSpec& spec, double t);

// Analytic ∫|envelope|² dt (closed form per shape).
double pulse_energy(const PulseSpec& spec);

// Same spec with peak_amplitude rescaled so pulse_energy == 1 (single photon).
PulseSpec photon_normalized(PulseSpec spec);

// Intensity FWHM of a two-sided exponential whose power spectrum is a
// Lorentzian of the given FWHM bandwidth: ln2/(π·Δν).
double fwhm_from_lorentzian_bandwidth(double bandwidth_mhz);

// k·σ_v with σ_v = sqrt(k_B·T/m), k = 2π/λ. Throws std::domain_error on
// non-physical arguments.
double derive_doppler_sigma(double temperature_c, double atomic_mass_amu,
                            double wavelength_nm);

std::string to_string(PulseShape shape);
PulseShape pulse_shape_from_string(const std::string& name);

// Raw experiment settings exactly as they appear in a config file. Physical
// solver inputs (LevelScheme etc.) are produced by resolve() in config.hpp so
// that derived quantities (Doppler width, collisional broadening, signal
// duration) stay consistent with the raw settings after overrides.
struct ExperimentConfig {
  // scheme.*  (frequencies in MHz; converted to rad/ns on resolve)
  double delta_signal_mhz = -700.0;
  // Offsets the control-induced level shift at the operating Rabi frequency;
  // the ensemble-averaged efficiency peaks here rather than at Raman resonance.
  double delta_twophoton_mhz = -130.0;
  double hyperfine_splitting_mhz = 814.5;
  double gamma_rad_mhz = 5.75;
  double coll_broadening_mhz_per_torr = 10.0;
  double buffer_pressure_torr = 5.0;
  double gamma_spin_mhz = 0.0;
  double coupling_signal_1 = 0.86602540378443865; // √3/2
  double coupling_signal_2 = 0.5;
  double coupling_control_1 = 1.0;
  double coupling_control_2 = -1.7320508075688772; // −√3
  // cell.*
  double optical_depth = 25.0;
  double cell_length_mm = 75.0;
  double temperature_c = 50.0;
  double atomic_mass_amu = 86.909;
  double wavelength_nm = 795.0;
  double twophoton_doppler_fraction = 0.00295; // from the 2.95 mrad beam angle
  // grid.*
  int n_velocity_classes = 16;
  int n_rings = 8;
  int n_z = 48;
  double dt_ns = 0.01;
  // beam.*
  double signal_waist_um = 240.0;
  double control_waist_um = 260.0;
  // signal.*
  PulseShape signal_shape = PulseShape::double_exponential;
  double signal_fwhm_ns = 0.5963124328450042; // ln2/(π·0.370 GHz)
  double signal_center_ns = 0.0;
  // control.*
  PulseShape control_shape = PulseShape::gaussian;
  double control_peak_mhz = 400.0;
  double control_fwhm_ns = 3.77;
  double control_read_peak_mhz = 400.0;
  double control_read_fwhm_ns = 3.77;
  // protocol.*
  double storage_time_ns = 160.0;
  double memory_lifetime_ns = 680.0;
};

// The published operating point: Δ = −2π×0.700 rad/ns, Ω = 2π×0.400 rad/ns,
// control FWHM 3.77 ns, d = 25, waists 240/260 µm, lifetime 680 ns.
ExperimentConfig default_experiment_config();

// Fully resolved inputs of one simulation run (all rates in rad/ns, signal
// photon-normalized). Produced from an ExperimentConfig by resolve().
struct PhysicsPoint {
  LevelScheme scheme;
  EnsembleConfig ensemble;
  PulseSpec signal;
  PulseSpec control_in;
  PulseSpec control_out;
  double storage_time = 0.0;
};

}  // namespace lambdamem
