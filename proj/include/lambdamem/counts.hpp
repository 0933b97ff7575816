#pragma once

#include <cstdint>
#include <vector>

// Closed-form counting-statistics analysis of a heralded storage experiment:
// efficiencies, noise floors, SNR, the noise-admixture model for the retrieved
// g², exponential lifetime fitting, and the time-bandwidth product.

namespace lambdamem {

// A value with its 1σ uncertainty.
struct Measured {
  double value = 0.0;
  double sigma = 0.0;
};

// Aggregate detector counts of one storage run plus calibration inputs.
struct CountsRecord {
  std::int64_t n_herald = 0;    // storage attempts
  std::int64_t n_ret = 0;       // retrieval-window counts, signal run
  std::int64_t n_noise_tot = 0; // retrieval-window counts, no input photon
  std::int64_t n_noise_mem = 0; // retrieval-window counts, source blocked
  double eta_h = 1.0;           // heralding efficiency
  double eta_det = 1.0;         // detection efficiency of the retrieval path
  double g2_input = 0.0;        // conditional autocorrelation of the input
};

// Systematic-uncertainty knobs propagated alongside Poisson errors.
struct AnalyticsOptions {
  double eta_h_rel_err = 0.10;
  double eta_det_rel_err = 0.10;
  double g2_input_err = 0.0002;
};

// (n_ret − n_noise_tot) / (n_herald · eta_h · eta_det). Throws
// std::domain_error when the record is unusable (no heralds, negative signal).
Measured e2e_efficiency(const CountsRecord& r, const AnalyticsOptions& opt = {});

// Noise counts per storage attempt, Poisson error.
Measured noise_floor(std::int64_t n_noise, std::int64_t n_herald);

// (n_ret − n_noise_tot) / n_noise_tot. Zero noise yields the infinite-SNR
// sentinel {inf, inf}.
Measured snr(const CountsRecord& r);

// Incoherent noise-admixture model for the retrieved-photon autocorrelation:
//   [ (N_ret−N)²·g2_in + 2·N·(N_ret−N) + N²·g2_noise ] / N_ret²,  N = n_noise_tot.
Measured g2_retrieved_model(const CountsRecord& r, double g2_noise = 2.0,
                            const AnalyticsOptions& opt = {});

// Limit of the model for ideal input photons in pure thermal noise: 2/(SNR+1).
double g2_snr_limit(double snr_value);

// One (storage time, efficiency ± σ) sample of the decay curve.
struct LifetimePoint {
  double storage_time_ns = 0.0;
  double eta = 0.0;
  double sigma = 1.0;
};

struct LifetimeFit {
  Measured eta0;         // efficiency at zero storage time
  Measured tau;          // 1/e decay time, ns; {inf, inf} when no decay resolves
  bool decays = true;    // false → tau is the no-decay sentinel
  int excluded = 0;      // non-positive-efficiency points dropped
  int iterations = 0;    // Gauss–Newton iterations used
};

// Weighted least squares of eta0·exp(−t/τ) on linear residuals, seeded by a
// log-linear fit and refined by Gauss–Newton; 1σ errors from the inverse
// normal matrix. Throws std::domain_error with fewer than 3 usable points.
LifetimeFit fit_lifetime(const std::vector<LifetimePoint>& points);

// B = lifetime × acceptance bandwidth (dimensionless), and η·B.
struct TimeBandwidth {
  double b = 0.0;
  double eta_b = 0.0;
};
TimeBandwidth time_bandwidth_product(double tau_ns, double bandwidth_mhz,
                                     double eta = 1.0);

}  // namespace lambdamem
