#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

// Discretization machinery: Chebyshev collocation in z, Gauss–Hermite velocity
// classes, and equal-energy transverse rings.

namespace lambdamem {

// Chebyshev–Gauss–Lobatto collocation on [0, cell_length]. Nodes ascend from
// z(0) = 0 (input face) to z(n−1) = cell_length. `deriv` applies d/dz on the
// nodes; `quad` are Clenshaw–Curtis weights so quad.dot(f) ≈ ∫f dz.
struct ChebyshevGrid {
  Eigen::VectorXd z;
  Eigen::MatrixXd deriv;
  Eigen::VectorXd quad;
};

// Throws std::domain_error for n_z < 2 or non-positive length.
ChebyshevGrid chebyshev_grid(int n_z, double cell_length);

// One-photon Doppler shifts and Maxwell–Boltzmann weights for the velocity
// classes. Weights sum to 1; shifts are symmetric about zero.
struct VelocityGrid {
  std::vector<double> shifts;  // rad/ns
  std::vector<double> weights;
};

// Gauss–Hermite nodes/weights scaled to a Gaussian of width doppler_sigma
// (nodes via the symmetric Jacobi matrix, weights from its eigenvectors).
// n_classes = 1 returns the Doppler-free class {0} with weight 1.
VelocityGrid build_velocity_grid(double doppler_sigma, int n_classes);

// Transverse decomposition of the Gaussian signal/control overlap into annuli
// carrying equal shares of the signal energy. Each ring sees the control
// amplitude at its energy-median radius.
struct RingDecomposition {
  std::vector<double> control_amplitude_factors; // ∈ (0,1], non-increasing
  std::vector<double> signal_energy_weights;     // sum to 1
};

RingDecomposition build_rings(double signal_waist_um, double control_waist_um,
                              int n_rings);

// Velocity-changing collisions between protocol stages: every class relaxes to
// the weighted mean profile. The weighted total Σ_v w_v S_v(z) is preserved
// exactly; the incoherent content Σ_v w_v |S_v|² can only shrink.
// Throws std::domain_error on mismatched profile lengths.
void rethermalize(std::vector<Eigen::VectorXcd>& per_class_spin,
                  const VelocityGrid& grid);

}  // namespace lambdamem
