#include "lambdamem/grids.hpp"

#include <cmath>
#include <stdexcept>

#include "lambdamem/units.hpp"

namespace lambdamem {

ChebyshevGrid chebyshev_grid(int n_z, double cell_length) {
  if (n_z < 2) throw std::domain_error("chebyshev_grid: need at least 2 points");
  if (cell_length <= 0.0) throw std::domain_error("chebyshev_grid: length must be positive");
  const int n = n_z - 1;

  // Gauss–Lobatto nodes x_j = cos(jπ/n) on [−1,1], mapped to z = L(1−x)/2 so
  // the node order ascends from the input face.
  Eigen::VectorXd x(n_z), theta(n_z);
  for (int j = 0; j <= n; ++j) {
    theta(j) = kPi * j / n;
    x(j) = std::cos(theta(j));
  }

  // First-derivative collocation matrix in x (off-diagonal formula plus
  // negative-sum diagonal, which keeps constants exactly in the null space).
  Eigen::MatrixXd d(n_z, n_z);
  auto endpoint_scale = [n](int i) { return (i == 0 || i == n) ? 2.0 : 1.0; };
  for (int i = 0; i <= n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = endpoint_scale(i) / endpoint_scale(j) * sign / (x(i) - x(j));
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;
  }

  ChebyshevGrid grid;
  grid.z = (cell_length / 2.0) * (Eigen::VectorXd::Ones(n_z) - x);
  grid.deriv = (-2.0 / cell_length) * d; // chain rule for z = L(1−x)/2

  // Clenshaw–Curtis weights on [−1,1] (cosine-series formula), scaled by L/2.
  // Symmetric in x, so no reordering is needed for the z orientation.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_z);
  if (n == 1) {
    w(0) = w(1) = 1.0;
  } else {
    const bool even = (n % 2 == 0);
    w(0) = w(n) = even ? 1.0 / (n * n - 1) : 1.0 / (n * n);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n - 1);
    const int k_max = even ? n / 2 - 1 : (n - 1) / 2;
    for (int k = 1; k <= k_max; ++k)
      for (int i = 1; i < n; ++i)
        v(i - 1) -= 2.0 * std::cos(2.0 * k * theta(i)) / (4.0 * k * k - 1.0);
    if (even)
      for (int i = 1; i < n; ++i)
        v(i - 1) -= std::cos(n * theta(i)) / (n * n - 1.0);
    for (int i = 1; i < n; ++i) w(i) = 2.0 * v(i - 1) / n;
  }
  grid.quad = (cell_length / 2.0) * w;
  return grid;
}

VelocityGrid build_velocity_grid(double doppler_sigma, int n_classes) {
  if (n_classes < 1) throw std::domain_error("build_velocity_grid: need at least one class");
  VelocityGrid grid;
  if (n_classes == 1) {
    grid.shifts = {0.0};
    grid.weights = {1.0};
    return grid;
  }

  // Hermite nodes/weights from the symmetric Jacobi matrix: off-diagonals
  // sqrt(k/2); weights are √π times the squared first eigenvector components.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n_classes, n_classes);
  for (int k = 1; k < n_classes; ++k)
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);

  grid.shifts.resize(n_classes);
  grid.weights.resize(n_classes);
  for (int i = 0; i < n_classes; ++i) {
    // Gaussian N(0, σ): node x of weight e^{−x²} maps to shift √2·σ·x, and the
    // 1/√π normalization makes the weights sum to one.
    grid.shifts[i] = std::sqrt(2.0) * doppler_sigma * eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    grid.weights[i] = v0 * v0;
  }

  // Symmetrize against round-off: quadrature is exactly even in velocity.
  for (int i = 0; i < n_classes / 2; ++i) {
    const int j = n_classes - 1 - i;
    const double s = 0.5 * (grid.shifts[j] - grid.shifts[i]);
    grid.shifts[i] = -s;
    grid.shifts[j] = s;
    const double w = 0.5 * (grid.weights[i] + grid.weights[j]);
    grid.weights[i] = grid.weights[j] = w;
  }
  if (n_classes % 2 == 1) grid.shifts[n_classes / 2] = 0.0;
  return grid;
}

RingDecomposition build_rings(double signal_waist_um, double control_waist_um,
                              int n_rings) {
  if (signal_waist_um <= 0.0 || control_waist_um <= 0.0)
    throw std::domain_error("build_rings: waists must be positive");
  if (n_rings < 1) throw std::domain_error("build_rings: need at least one ring");

  RingDecomposition rings;
  rings.signal_energy_weights.assign(n_rings, 1.0 / n_rings);
  rings.control_amplitude_factors.resize(n_rings);
  if (n_rings == 1) {
    // Plane-wave limit: the single ring sees the on-axis control amplitude.
    rings.control_amplitude_factors[0] = 1.0;
    return rings;
  }

  // Signal energy inside radius r is 1 − exp(−2r²/w_s²); ring i covers the
  // energy quantile (i/n, (i+1)/n]. Each ring samples the control amplitude
  // exp(−r²/w_c²) at its energy-median radius.
  const double ws2 = signal_waist_um * signal_waist_um;
  const double wc2 = control_waist_um * control_waist_um;
  for (int i = 0; i < n_rings; ++i) {
    const double q_mid = (i + 0.5) / n_rings;
    const double r2_mid = -0.5 * ws2 * std::log1p(-q_mid);
    rings.control_amplitude_factors[i] = std::exp(-r2_mid / wc2);
  }
  return rings;
}

void rethermalize(std::vector<Eigen::VectorXcd>& per_class_spin,
                  const VelocityGrid& grid) {
  if (per_class_spin.empty()) return;
  if (per_class_spin.size() != grid.weights.size())
    throw std::domain_error("rethermalize: class count mismatch");
  const Eigen::Index len = per_class_spin.front().size();
  for (const auto& s : per_class_spin)
    if (s.size() != len) throw std::domain_error("rethermalize: profile length mismatch");

  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(len);
  for (std::size_t v = 0; v < per_class_spin.size(); ++v)
    mean += grid.weights[v] * per_class_spin[v];
  for (auto& s : per_class_spin) s = mean;
}

}  // namespace lambdamem
