#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lambdamem/grids.hpp"
#include "lambdamem/model.hpp"

// Maxwell–Bloch integrator for the four-level Λ memory in the comoving frame:
//
//   ∂_z E    = i·g·(c1·P̄1 + c2·P̄2)                     g = sqrt(d·γ/(2L))
//   ∂_t P_j  = −[γ + i(Δ_j + δ_v)]·P_j + i·c_j·g·E + i·(b_j·Ω/2)·S
//   ∂_t S    = −[γ_s + i(Δ_tp + f·δ_v)]·S + i·Σ_j (b_j·Ω*/2)·P_j
//
// with Δ₁ = Δ, Δ₂ = Δ − Δ_hfs and γ = γ_rad + γ_coll. The coupling g is fixed
// by the resonant two-level limit: CW intensity transmission e^(−d). All
// velocity classes within a solver share one field; the propagation equation
// takes the class-weight-averaged polarizations P̄_j = Σ_v w_v P_{j,v}.
//
// Time stepping is a partially implicit second-order predictor–corrector: the
// stiff diagonal (decay + detuning) terms are treated trapezoidally, the
// coupling terms explicitly, and the field is slaved to the atoms after each
// stage by solving the spatial boundary-value problem with E(0) = input. The
// scheme reproduces CW steady states exactly at any dt.

namespace lambdamem {

using Complex = std::complex<double>;

// Raised when the integrator produces a non-finite value.
class NumericalInstabilityError : public std::runtime_error {
 public:
  NumericalInstabilityError(const std::string& context, long step_index, double t);
  long step_index() const { return step_index_; }
  double t() const { return t_; }

 private:
  long step_index_;
  double t_;
};

// Snapshot of one single-velocity-class realization on the collocation grid.
struct FieldState {
  Eigen::VectorXcd e_field; // signal amplitude, photon-flux normalized
  Eigen::VectorXcd p1, p2;  // optical coherences to |e1>, |e2>
  Eigen::VectorXcd spin;    // ground-state coherence S(z)
  double t = 0.0;
};

// Outcome of one storage → hold → retrieval protocol run, with the full energy
// ledger. Efficiencies are referenced to the integrated input pulse energy.
struct MemoryRunResult {
  double eta_storage = 0.0;  // spin-wave excitation at end of read-in / input
  double eta_internal = 0.0; // retrieved output energy / input
  std::vector<double> leakage_t, leakage_flux;     // |E(L,t)|² during read-in
  std::vector<double> retrieval_t, retrieval_flux; // |E(L,t)|² during read-out
  Eigen::VectorXd z;              // collocation nodes, mm
  Eigen::VectorXcd spin_profile;  // weighted spin wave after read-in
  double input_energy = 0.0;
  double leaked_energy = 0.0;
  double retrieved_energy = 0.0;
  double decayed_energy = 0.0;  // radiative/collisional + spin decay during pulses
  double hold_loss = 0.0;       // excitation removed during the hold stage
  double residual_energy = 0.0; // excitation left in the medium at the end

  // Bookkeeping residual of the energy ledger; |defect| stays within the
  // integration tolerance for converged settings.
  double energy_defect() const {
    return input_energy - (leaked_energy + retrieved_energy + decayed_energy +
                           hold_loss + residual_energy);
  }
};

// Multi-velocity-class integrator with a cached spatial factorization.
// Instances are single-threaded; run one per (ring × sweep point) task.
class MbSolver {
 public:
  // Builds the collocation grid and velocity classes from `config`;
  // `velocity_override` substitutes explicit classes (used for single-class
  // reference runs and tests).
  MbSolver(const LevelScheme& scheme, const EnsembleConfig& config,
           std::optional<VelocityGrid> velocity_override = std::nullopt);

  // Clears the atomic state, sets the clock to t0, and slaves the field to the
  // (empty) medium with boundary value `input0`.
  void reset(double t0, Complex input0 = 0.0);

  // Advances one step of dt. `omega_now/next` are the control Rabi amplitudes
  // at the step endpoints, `input_next` the signal boundary value at t+dt.
  // Throws NumericalInstabilityError if the state leaves the finite domain.
  void step(Complex omega_now, Complex omega_next, Complex input_next);

  double t() const { return t_; }
  double dt() const { return dt_; }
  int n_z() const { return static_cast<int>(grid_.z.size()); }
  int n_classes() const { return static_cast<int>(velocity_.weights.size()); }
  const ChebyshevGrid& grid() const { return grid_; }
  const VelocityGrid& velocity_grid() const { return velocity_; }

  Complex output_amplitude() const { return e_(e_.size() - 1); } // E at z = L
  double output_flux() const { return std::norm(output_amplitude()); }

  // Weighted excitation numbers Σ_v w_v ∫(…)dz via Clenshaw–Curtis quadrature.
  double excitation() const;      // |P1|² + |P2|² + |S|²
  double spin_excitation() const; // |S|² only
  // Accumulated decay ∫dt (2γ·Σw|P|² + 2γ_s·Σw|S|²) since the last reset/rebase.
  double decayed() const { return decayed_; }

  Eigen::VectorXcd weighted_spin() const; // Σ_v w_v S_v(z)
  const Eigen::VectorXcd& e_field() const { return e_; }

  // Hold-stage operations -----------------------------------------------
  // Zeroes E and both optical coherences (they are fully damped over any
  // macroscopic hold), returning the excitation they carried.
  double clear_optical();
  // Replaces every class's spin profile by the weighted mean (velocity
  // rethermalization); returns the excitation lost to class decoherence.
  double rethermalize_spins();
  // Multiplies all spin profiles by `factor` (hold decay), returning the
  // excitation removed.
  double scale_spins(double factor);

  // Moves the clock without touching state (stage transitions) and restarts
  // the decay-rate trapezoid.
  void rebase_time(double t0);

  // Direct state access for tests and the single-class adapter.
  FieldState extract_state(int velocity_class) const;
  void inject_state(const FieldState& state, int velocity_class);
  void refresh_field(Complex input_boundary); // re-slave E to current coherences

 private:
  void solve_field(const Eigen::VectorXcd& weighted_p1,
                   const Eigen::VectorXcd& weighted_p2, Complex boundary);
  double loss_rate() const;
  void check_finite(const char* stage_name);

  LevelScheme scheme_;
  double coupling_g_ = 0.0;
  double dt_ = 0.0;
  double f_twophoton_ = 0.0;
  ChebyshevGrid grid_;
  VelocityGrid velocity_;
  Eigen::PartialPivLU<Eigen::MatrixXd> bvp_lu_; // ∂_z with boundary row at z=0

  // State: field on nodes; per-class coherences as (n_z × n_classes) columns.
  Eigen::VectorXcd e_;
  Eigen::MatrixXcd p1_, p2_, s_;
  double t_ = 0.0;
  long step_index_ = 0;
  double decayed_ = 0.0;
  double prev_loss_rate_ = 0.0;

  // Per-class trapezoidal update coefficients and scratch arrays.
  Eigen::VectorXcd alpha1_, alpha2_, alphas_, beta1_, beta2_, betas_;
  Eigen::MatrixXcd p1_pred_, p2_pred_, s_pred_, r1_, r2_, rs_;
  Eigen::VectorXcd rhs_, wp1_, wp2_;
  Eigen::VectorXd re_, im_, weights_;
  Eigen::VectorXcd weights_c_;
};

// Single-realization reference step matching the equations above for one
// velocity class. Builds its workspace on every call — intended for oracle
// tests and small studies; use MbSolver for production runs.
FieldState step(const FieldState& state, const LevelScheme& scheme,
                const EnsembleConfig& config, Complex control_amp,
                double doppler_shift, Complex input_boundary, double dt);

struct ProtocolOptions {
  double control_scale = 1.0;    // transverse-ring control amplitude factor
  bool rethermalize_hold = true; // velocity redistribution during the hold
};

// Full storage protocol: read-in (signal + control_in), hold of storage_time
// (clear optical parts; rethermalize if the hold is nonzero; apply lifetime
// decay), read-out (control_out only, forward retrieval at z = L).
// Stage windows extend 4×(signal.fwhm + control.fwhm) beyond the pulse
// centers; the read-out control mirrors any read-in control–signal offset.
// Throws std::domain_error for negative storage_time.
MemoryRunResult run_protocol(const LevelScheme& scheme,
                             const EnsembleConfig& config,
                             const PulseSpec& signal,
                             const PulseSpec& control_in,
                             const PulseSpec& control_out, double storage_time,
                             const ProtocolOptions& options = {});

}  // namespace lambdamem
