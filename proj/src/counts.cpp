#include "lambdamem/counts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace lambdamem {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_counts(const CountsRecord& r) {
  if (r.n_herald <= 0) throw std::domain_error("counts: n_herald must be positive");
  if (r.n_ret < 0 || r.n_noise_tot < 0 || r.n_noise_mem < 0)
    throw std::domain_error("counts: negative count");
}
}  // namespace

Measured e2e_efficiency(const CountsRecord& r, const AnalyticsOptions& opt) {
  require_counts(r);
  if (r.eta_h <= 0.0 || r.eta_h > 1.0 || r.eta_det <= 0.0 || r.eta_det > 1.0)
    throw std::domain_error("counts: efficiencies must lie in (0, 1]");
  if (r.n_ret < r.n_noise_tot)
    throw std::domain_error(
        "counts: retrieval counts below noise floor (negative signal)");

  const double denom =
      static_cast<double>(r.n_herald) * r.eta_h * r.eta_det;
  const double value = static_cast<double>(r.n_ret - r.n_noise_tot) / denom;
  const double poisson =
      std::sqrt(static_cast<double>(r.n_ret + r.n_noise_tot)) / denom;
  const double systematic =
      value * std::hypot(opt.eta_h_rel_err, opt.eta_det_rel_err);
  return {value, std::hypot(poisson, systematic)};
}

Measured noise_floor(std::int64_t n_noise, std::int64_t n_herald) {
  if (n_herald <= 0) throw std::domain_error("counts: n_herald must be positive");
  if (n_noise < 0) throw std::domain_error("counts: negative count");
  const double nh = static_cast<double>(n_herald);
  return {static_cast<double>(n_noise) / nh,
          std::sqrt(static_cast<double>(n_noise)) / nh};
}

Measured snr(const CountsRecord& r) {
  require_counts(r);
  if (r.n_noise_tot == 0) return {kInf, kInf};
  const double n_ret = static_cast<double>(r.n_ret);
  const double n_noise = static_cast<double>(r.n_noise_tot);
  const double value = (n_ret - n_noise) / n_noise;
  // Poisson on both counts: ∂/∂n_ret = 1/n_noise, ∂/∂n_noise = −n_ret/n_noise².
  const double var = n_ret / (n_noise * n_noise) +
                     n_ret * n_ret / (n_noise * n_noise * n_noise);
  return {value, std::sqrt(var)};
}

Measured g2_retrieved_model(const CountsRecord& r, double g2_noise,
                            const AnalyticsOptions& opt) {
  require_counts(r);
  if (r.n_ret <= 0) throw std::domain_error("counts: n_ret must be positive");
  if (g2_noise < 0.0 || r.g2_input < 0.0)
    throw std::domain_error("counts: g2 values must be non-negative");
  if (r.n_ret < r.n_noise_tot)
    throw std::domain_error(
        "counts: retrieval counts below noise floor (negative signal)");

  const double ret = static_cast<double>(r.n_ret);
  const double noise = static_cast<double>(r.n_noise_tot);
  const double sig = ret - noise;
  const double g_in = r.g2_input;
  const double value =
      (sig * sig * g_in + 2.0 * noise * sig + noise * noise * g2_noise) /
      (ret * ret);

  // First-order propagation: Poisson on n_ret and n_noise_tot plus the input
  // g² calibration error.
  const double d_ret =
      (2.0 * sig * g_in + 2.0 * noise) / (ret * ret) - 2.0 * value / ret;
  const double d_noise =
      (-2.0 * sig * g_in + 2.0 * sig - 2.0 * noise + 2.0 * noise * g2_noise) /
      (ret * ret);
  const double d_gin = sig * sig / (ret * ret);
  const double var = d_ret * d_ret * ret + d_noise * d_noise * noise +
                     d_gin * d_gin * opt.g2_input_err * opt.g2_input_err;
  return {value, std::sqrt(var)};
}

double g2_snr_limit(double snr_value) {
  if (snr_value < 0.0) throw std::domain_error("counts: SNR must be non-negative");
  return 2.0 / (snr_value + 1.0);
}

LifetimeFit fit_lifetime(const std::vector<LifetimePoint>& points) {
  std::vector<LifetimePoint> usable;
  usable.reserve(points.size());
  int excluded = 0;
  for (const auto& p : points) {
    if (p.sigma <= 0.0)
      throw std::domain_error("fit_lifetime: uncertainties must be positive");
    if (p.eta <= 0.0) {
      ++excluded; // noise-subtracted efficiencies can dip below zero
      continue;
    }
    usable.push_back(p);
  }
  const int n = static_cast<int>(usable.size());
  if (n < 3) throw std::domain_error("fit_lifetime: fewer than 3 usable points");
  double t_min = usable.front().storage_time_ns, t_max = t_min;
  for (const auto& p : usable) {
    t_min = std::min(t_min, p.storage_time_ns);
    t_max = std::max(t_max, p.storage_time_ns);
  }
  if (t_max <= t_min)
    throw std::domain_error("fit_lifetime: storage times must be distinct");

  // Seed: weighted straight line through ln(eta) = ln(eta0) − k·t, with
  // weights (eta/σ)² from δln(eta) = σ/eta.
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& p : usable) {
    const double w = (p.eta / p.sigma) * (p.eta / p.sigma);
    const double y = std::log(p.eta);
    sw += w;
    st += w * p.storage_time_ns;
    sy += w * y;
    stt += w * p.storage_time_ns * p.storage_time_ns;
    sty += w * p.storage_time_ns * y;
  }
  const double det = sw * stt - st * st; // > 0: distinct times, positive weights
  double k = -(sw * sty - st * sy) / det;
  double eta0 = std::exp((sy * stt - st * sty) / det);

  // Gauss–Newton on the linear residuals r_i = (eta0·e^{−k·t} − y_i)/σ_i.
  auto ssr = [&](double a, double kk) {
    double s = 0;
    for (const auto& p : usable) {
      const double r = (a * std::exp(-kk * p.storage_time_ns) - p.eta) / p.sigma;
      s += r * r;
    }
    return s;
  };
  Eigen::MatrixXd jac(n, 2);
  Eigen::VectorXd res(n);
  double current = ssr(eta0, k);
  int iterations = 0;
  for (; iterations < 100; ++iterations) {
    for (int i = 0; i < n; ++i) {
      const auto& p = usable[i];
      const double e = std::exp(-k * p.storage_time_ns);
      jac(i, 0) = e / p.sigma;
      jac(i, 1) = -eta0 * p.storage_time_ns * e / p.sigma;
      res(i) = (eta0 * e - p.eta) / p.sigma;
    }
    const Eigen::Vector2d delta =
        (jac.transpose() * jac).ldlt().solve(jac.transpose() * res);
    if (!delta.allFinite()) break;
    // Backtrack if the full step overshoots.
    double scale = 1.0;
    double next_eta0 = eta0, next_k = k, next_ssr = current;
    for (int halving = 0; halving < 25; ++halving) {
      const double a = eta0 - scale * delta(0);
      const double kk = k - scale * delta(1);
      const double s = (a > 0.0) ? ssr(a, kk) : kInf;
      if (s <= current) {
        next_eta0 = a;
        next_k = kk;
        next_ssr = s;
        break;
      }
      scale *= 0.5;
    }
    const double step = std::abs(next_eta0 - eta0) / std::max(eta0, 1e-300) +
                        std::abs(next_k - k) * (t_max - t_min);
    eta0 = next_eta0;
    k = next_k;
    current = next_ssr;
    if (step < 1e-13) break;
  }

  // 1σ errors from the inverse normal matrix at the optimum (residuals are
  // already σ-normalized).
  for (int i = 0; i < n; ++i) {
    const auto& p = usable[i];
    const double e = std::exp(-k * p.storage_time_ns);
    jac(i, 0) = e / p.sigma;
    jac(i, 1) = -eta0 * p.storage_time_ns * e / p.sigma;
  }
  const Eigen::Matrix2d cov =
      (jac.transpose() * jac).inverse();

  LifetimeFit fit;
  fit.excluded = excluded;
  fit.iterations = iterations;
  fit.eta0 = {eta0, std::sqrt(std::max(cov(0, 0), 0.0))};
  const double sigma_k = std::sqrt(std::max(cov(1, 1), 0.0));
  if (k <= 0.0 || k * (t_max - t_min) < 1e-9) {
    fit.decays = false; // no measurable decay over the sampled span
    fit.tau = {kInf, kInf};
  } else {
    fit.tau = {1.0 / k, sigma_k / (k * k)};
  }
  return fit;
}

TimeBandwidth time_bandwidth_product(double tau_ns, double bandwidth_mhz,
                                     double eta) {
  if (tau_ns <= 0.0 || bandwidth_mhz <= 0.0)
    throw std::domain_error("time_bandwidth_product: inputs must be positive");
  TimeBandwidth tb;
  tb.b = tau_ns * bandwidth_mhz * 1e-3; // ns × MHz
  tb.eta_b = eta * tb.b;
  return tb;
}

}  // namespace lambdamem
