#include "lambdamem/solver.hpp"

#include <algorithm>
#include <cmath>

namespace lambdamem {

namespace {
constexpr Complex kI{0.0, 1.0};

// Uniform-grid trapezoid; the traces are sampled on the stepping grid.
double trapezoid(const std::vector<double>& f, double dt) {
  if (f.size() < 2) return 0.0;
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) sum += f[k];
  return sum * dt;
}
}  // namespace

NumericalInstabilityError::NumericalInstabilityError(const std::string& context,
                                                     long step_index, double t)
    : std::runtime_error("numerical instability in " + context + " at step " +
                         std::to_string(step_index) + ", t = " +
                         std::to_string(t) + " ns"),
      step_index_(step_index),
      t_(t) {}

MbSolver::MbSolver(const LevelScheme& scheme, const EnsembleConfig& config,
                   std::optional<VelocityGrid> velocity_override)
    : scheme_(scheme),
      dt_(config.dt),
      f_twophoton_(config.twophoton_doppler_fraction),
      grid_(chebyshev_grid(config.n_z, config.cell_length)) {
  if (config.dt <= 0.0) throw std::domain_error("MbSolver: dt must be positive");
  if (config.optical_depth < 0.0)
    throw std::domain_error("MbSolver: optical depth must be non-negative");

  velocity_ = velocity_override
                  ? std::move(*velocity_override)
                  : build_velocity_grid(config.doppler_sigma,
                                        config.n_velocity_classes);

  // Coupling normalized so a resonant two-level CW run transmits e^(−d) in
  // intensity: |E(L)|² = |E(0)|²·exp(−2·g²·L/γ) with g² = d·γ/(2L).
  coupling_g_ = std::sqrt(config.optical_depth * scheme.gamma_total() /
                          (2.0 * config.cell_length));

  // ∂_z collocation matrix with the first row replaced by the boundary
  // condition E(z=0) = input; factored once, reused every substep.
  const int n = n_z();
  Eigen::MatrixXd bvp = grid_.deriv;
  bvp.row(0).setZero();
  bvp(0, 0) = 1.0;
  bvp_lu_.compute(bvp);

  const int nv = n_classes();
  const double gamma = scheme_.gamma_total();
  alpha1_.resize(nv); alpha2_.resize(nv); alphas_.resize(nv);
  beta1_.resize(nv); beta2_.resize(nv); betas_.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const double dop = velocity_.shifts[v];
    const Complex a1 = gamma + kI * (scheme_.delta1() + dop);
    const Complex a2 = gamma + kI * (scheme_.delta2() + dop);
    const Complex as =
        scheme_.gamma_spin + kI * (scheme_.delta_twophoton + f_twophoton_ * dop);
    // Trapezoidal treatment of the stiff diagonal: y ← α·y + β·(coupling).
    alpha1_(v) = (1.0 - 0.5 * dt_ * a1) / (1.0 + 0.5 * dt_ * a1);
    alpha2_(v) = (1.0 - 0.5 * dt_ * a2) / (1.0 + 0.5 * dt_ * a2);
    alphas_(v) = (1.0 - 0.5 * dt_ * as) / (1.0 + 0.5 * dt_ * as);
    beta1_(v) = dt_ / (1.0 + 0.5 * dt_ * a1);
    beta2_(v) = dt_ / (1.0 + 0.5 * dt_ * a2);
    betas_(v) = dt_ / (1.0 + 0.5 * dt_ * as);
  }

  e_.resize(n);
  p1_.resize(n, nv); p2_.resize(n, nv); s_.resize(n, nv);
  p1_pred_.resize(n, nv); p2_pred_.resize(n, nv); s_pred_.resize(n, nv);
  r1_.resize(n, nv); r2_.resize(n, nv); rs_.resize(n, nv);
  rhs_.resize(n); re_.resize(n); im_.resize(n);
  wp1_.resize(n); wp2_.resize(n);
  weights_ = Eigen::Map<const Eigen::VectorXd>(velocity_.weights.data(), nv);
  weights_c_ = weights_.cast<Complex>();
  reset(0.0);
}

void MbSolver::reset(double t0, Complex input0) {
  p1_.setZero(); p2_.setZero(); s_.setZero();
  t_ = t0;
  step_index_ = 0;
  decayed_ = 0.0;
  wp1_.setZero(); wp2_.setZero();
  solve_field(wp1_, wp2_, input0);
  prev_loss_rate_ = loss_rate();
}

void MbSolver::solve_field(const Eigen::VectorXcd& weighted_p1,
                           const Eigen::VectorXcd& weighted_p2,
                           Complex boundary) {
  rhs_ = (kI * coupling_g_) *
         (scheme_.c1 * weighted_p1 + scheme_.c2 * weighted_p2);
  rhs_(0) = boundary;
  re_ = bvp_lu_.solve(rhs_.real().eval());
  im_ = bvp_lu_.solve(rhs_.imag().eval());
  e_.real() = re_;
  e_.imag() = im_;
}

void MbSolver::step(Complex omega_now, Complex omega_next, Complex input_next) {
  const int nv = n_classes();
  const Complex igc1 = kI * coupling_g_ * scheme_.c1;
  const Complex igc2 = kI * coupling_g_ * scheme_.c2;
  const Complex k1n = 0.5 * kI * scheme_.b1 * omega_now;
  const Complex k2n = 0.5 * kI * scheme_.b2 * omega_now;
  const Complex k1p = 0.5 * kI * scheme_.b1 * omega_next;
  const Complex k2p = 0.5 * kI * scheme_.b2 * omega_next;
  const Complex m1n = 0.5 * kI * scheme_.b1 * std::conj(omega_now);
  const Complex m2n = 0.5 * kI * scheme_.b2 * std::conj(omega_now);
  const Complex m1p = 0.5 * kI * scheme_.b1 * std::conj(omega_next);
  const Complex m2p = 0.5 * kI * scheme_.b2 * std::conj(omega_next);

  // Predictor: coupling sources frozen at t_n, stiff diagonal trapezoidal.
  for (int v = 0; v < nv; ++v) {
    r1_.col(v) = igc1 * e_ + k1n * s_.col(v);
    r2_.col(v) = igc2 * e_ + k2n * s_.col(v);
    rs_.col(v) = m1n * p1_.col(v) + m2n * p2_.col(v);
    p1_pred_.col(v) = alpha1_(v) * p1_.col(v) + beta1_(v) * r1_.col(v);
    p2_pred_.col(v) = alpha2_(v) * p2_.col(v) + beta2_(v) * r2_.col(v);
    s_pred_.col(v) = alphas_(v) * s_.col(v) + betas_(v) * rs_.col(v);
  }
  wp1_.noalias() = p1_pred_ * weights_c_;
  wp2_.noalias() = p2_pred_ * weights_c_;
  solve_field(wp1_, wp2_, input_next); // e_ now holds the predicted field

  // Corrector: average of the t_n and predicted t_{n+1} coupling sources.
  for (int v = 0; v < nv; ++v) {
    p1_.col(v) = alpha1_(v) * p1_.col(v) +
                 0.5 * beta1_(v) *
                     (r1_.col(v) + igc1 * e_ + k1p * s_pred_.col(v));
    p2_.col(v) = alpha2_(v) * p2_.col(v) +
                 0.5 * beta2_(v) *
                     (r2_.col(v) + igc2 * e_ + k2p * s_pred_.col(v));
    s_.col(v) = alphas_(v) * s_.col(v) +
                0.5 * betas_(v) *
                    (rs_.col(v) + m1p * p1_pred_.col(v) + m2p * p2_pred_.col(v));
  }
  wp1_.noalias() = p1_ * weights_c_;
  wp2_.noalias() = p2_ * weights_c_;
  solve_field(wp1_, wp2_, input_next);

  t_ += dt_;
  ++step_index_;
  check_finite("Maxwell-Bloch step");

  const double rate = loss_rate();
  decayed_ += 0.5 * (prev_loss_rate_ + rate) * dt_;
  prev_loss_rate_ = rate;
}

double MbSolver::loss_rate() const {
  const double p_norm =
      weights_.dot((p1_.cwiseAbs2() + p2_.cwiseAbs2()).transpose() * grid_.quad);
  const double s_norm = weights_.dot(s_.cwiseAbs2().transpose() * grid_.quad);
  return 2.0 * scheme_.gamma_total() * p_norm +
         2.0 * scheme_.gamma_spin * s_norm;
}

double MbSolver::excitation() const {
  const Eigen::MatrixXd density =
      p1_.cwiseAbs2() + p2_.cwiseAbs2() + s_.cwiseAbs2();
  return weights_.dot(density.transpose() * grid_.quad);
}

double MbSolver::spin_excitation() const {
  return weights_.dot(s_.cwiseAbs2().transpose() * grid_.quad);
}

Eigen::VectorXcd MbSolver::weighted_spin() const { return s_ * weights_c_; }

double MbSolver::clear_optical() {
  const double before = excitation();
  e_.setZero();
  p1_.setZero();
  p2_.setZero();
  prev_loss_rate_ = loss_rate();
  return before - spin_excitation();
}

double MbSolver::rethermalize_spins() {
  const double before = spin_excitation();
  wp1_.noalias() = s_ * weights_c_; // weighted mean profile
  for (int v = 0; v < n_classes(); ++v) s_.col(v) = wp1_;
  prev_loss_rate_ = loss_rate();
  return before - spin_excitation();
}

double MbSolver::scale_spins(double factor) {
  const double before = spin_excitation();
  s_ *= factor;
  prev_loss_rate_ = loss_rate();
  return before - spin_excitation();
}

void MbSolver::rebase_time(double t0) {
  t_ = t0;
  prev_loss_rate_ = loss_rate();
}

FieldState MbSolver::extract_state(int velocity_class) const {
  FieldState state;
  state.e_field = e_;
  state.p1 = p1_.col(velocity_class);
  state.p2 = p2_.col(velocity_class);
  state.spin = s_.col(velocity_class);
  state.t = t_;
  return state;
}

void MbSolver::inject_state(const FieldState& state, int velocity_class) {
  if (state.e_field.size() != n_z() || state.p1.size() != n_z() ||
      state.p2.size() != n_z() || state.spin.size() != n_z())
    throw std::domain_error("inject_state: array length mismatch with grid");
  e_ = state.e_field;
  p1_.col(velocity_class) = state.p1;
  p2_.col(velocity_class) = state.p2;
  s_.col(velocity_class) = state.spin;
  t_ = state.t;
  prev_loss_rate_ = loss_rate();
}

void MbSolver::refresh_field(Complex input_boundary) {
  wp1_.noalias() = p1_ * weights_c_;
  wp2_.noalias() = p2_ * weights_c_;
  solve_field(wp1_, wp2_, input_boundary);
}

void MbSolver::check_finite(const char* stage_name) {
  if (e_.allFinite() && p1_.allFinite() && p2_.allFinite() && s_.allFinite())
    return;
  throw NumericalInstabilityError(stage_name, step_index_, t_);
}

FieldState step(const FieldState& state, const LevelScheme& scheme,
                const EnsembleConfig& config, Complex control_amp,
                double doppler_shift, Complex input_boundary, double dt) {
  EnsembleConfig single = config;
  single.n_velocity_classes = 1;
  single.dt = dt;
  MbSolver solver(scheme, single, VelocityGrid{{doppler_shift}, {1.0}});
  solver.inject_state(state, 0);
  solver.step(control_amp, control_amp, input_boundary);
  return solver.extract_state(0);
}

MemoryRunResult run_protocol(const LevelScheme& scheme,
                             const EnsembleConfig& config,
                             const PulseSpec& signal,
                             const PulseSpec& control_in,
                             const PulseSpec& control_out, double storage_time,
                             const ProtocolOptions& options) {
  if (storage_time < 0.0)
    throw std::domain_error("run_protocol: storage_time must be non-negative");

  const double dt = config.dt;
  auto input_fn = [&](double t) { return Complex(pulse_envelope(signal, t)); };
  auto ctrl_in_fn = [&](double t) {
    return Complex(options.control_scale * pulse_envelope(control_in, t));
  };

  MemoryRunResult res;
  MbSolver solver(scheme, config);
  res.z = solver.grid().z;

  // --- Read-in: window wide enough that both pulses fit with 4×FWHM margins.
  const double margin_in = 4.0 * (signal.fwhm + control_in.fwhm);
  const double t0 = std::min(signal.center, control_in.center) - margin_in;
  const double t1 = std::max(signal.center, control_in.center) + margin_in;
  const long n_in = std::lround(std::ceil((t1 - t0) / dt));

  solver.reset(t0, input_fn(t0));
  res.leakage_t.reserve(n_in + 1);
  res.leakage_flux.reserve(n_in + 1);
  res.leakage_t.push_back(t0);
  res.leakage_flux.push_back(solver.output_flux());
  std::vector<double> input_flux;
  input_flux.reserve(n_in + 1);
  input_flux.push_back(std::norm(input_fn(t0)));
  for (long k = 0; k < n_in; ++k) {
    const double tn = t0 + static_cast<double>(k) * dt;
    solver.step(ctrl_in_fn(tn), ctrl_in_fn(tn + dt), input_fn(tn + dt));
    res.leakage_t.push_back(solver.t());
    res.leakage_flux.push_back(solver.output_flux());
    input_flux.push_back(std::norm(input_fn(tn + dt)));
  }
  res.input_energy = trapezoid(input_flux, dt);
  res.leaked_energy = trapezoid(res.leakage_flux, dt);
  res.spin_profile = solver.weighted_spin();
  const double stored = solver.spin_excitation();

  // --- Hold: optical parts are fully damped; the spin wave rethermalizes over
  // the velocity classes and decays with the configured lifetime (an
  // efficiency 1/e time, hence the amplitude factor exp(−t/2τ)).
  const double exc_after_readin = solver.excitation();
  solver.clear_optical();
  if (storage_time > 0.0) {
    if (options.rethermalize_hold) solver.rethermalize_spins();
    if (config.memory_lifetime > 0.0)
      solver.scale_spins(std::exp(-storage_time / (2.0 * config.memory_lifetime)));
  }
  res.hold_loss = exc_after_readin - solver.excitation();

  // --- Read-out: forward retrieval with the read control only. Any read-in
  // control–signal offset is mirrored about the nominal retrieval center.
  const double margin_out = 4.0 * (signal.fwhm + control_out.fwhm);
  const double offset_in = control_in.center - signal.center;
  const double t2 = t1 + storage_time;
  const double nominal_center = t2 + margin_out;
  PulseSpec read = control_out;
  read.center = nominal_center - offset_in;
  const double t3 = std::max(read.center, nominal_center) + margin_out;
  auto ctrl_out_fn = [&](double t) {
    return Complex(options.control_scale * pulse_envelope(read, t));
  };
  const long n_out = std::lround(std::ceil((t3 - t2) / dt));

  solver.rebase_time(t2);
  res.retrieval_t.reserve(n_out + 1);
  res.retrieval_flux.reserve(n_out + 1);
  res.retrieval_t.push_back(t2);
  res.retrieval_flux.push_back(solver.output_flux());
  for (long k = 0; k < n_out; ++k) {
    const double tn = t2 + static_cast<double>(k) * dt;
    solver.step(ctrl_out_fn(tn), ctrl_out_fn(tn + dt), 0.0);
    res.retrieval_t.push_back(solver.t());
    res.retrieval_flux.push_back(solver.output_flux());
  }
  res.retrieved_energy = trapezoid(res.retrieval_flux, dt);
  res.residual_energy = solver.excitation();
  res.decayed_energy = solver.decayed();

  if (res.input_energy > 0.0) {
    res.eta_storage = stored / res.input_energy;
    res.eta_internal = res.retrieved_energy / res.input_energy;
  }
  return res;
}

}  // namespace lambdamem
