#include "lambdamem/ensemble.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "lambdamem/grids.hpp"
#include "lambdamem/parallel.hpp"

namespace lambdamem {

MemoryRunResult ensemble_run(const LevelScheme& scheme,
                             const EnsembleConfig& config,
                             const PulseSpec& signal,
                             const PulseSpec& control_in,
                             const PulseSpec& control_out,
                             double storage_time) {
  const RingDecomposition rings =
      build_rings(config.signal_waist, config.control_waist, config.n_rings);
  const int n = config.n_rings;

  std::vector<MemoryRunResult> per_ring(n);
  std::vector<std::string> failures(n);
  parallel_for(n, [&](int r) {
    try {
      ProtocolOptions options;
      options.control_scale = rings.control_amplitude_factors[r];
      per_ring[r] = run_protocol(scheme, config, signal, control_in,
                                 control_out, storage_time, options);
    } catch (const std::exception& e) {
      failures[r] = e.what();
    }
  });
  for (int r = 0; r < n; ++r)
    if (!failures[r].empty())
      throw std::runtime_error("ensemble ring " + std::to_string(r) + ": " +
                               failures[r]);

  if (n == 1) return std::move(per_ring.front());

  // Energy-weighted reduction. All rings share the pulse timing, so the trace
  // grids are identical and fluxes add with the ring weights.
  MemoryRunResult total = per_ring.front();
  const auto& w = rings.signal_energy_weights;
  auto scale = [](MemoryRunResult& res, double f) {
    res.eta_storage *= f;
    res.eta_internal *= f;
    for (auto& v : res.leakage_flux) v *= f;
    for (auto& v : res.retrieval_flux) v *= f;
    res.spin_profile *= f;
    res.input_energy *= f;
    res.leaked_energy *= f;
    res.retrieved_energy *= f;
    res.decayed_energy *= f;
    res.hold_loss *= f;
    res.residual_energy *= f;
  };
  scale(total, w[0]);
  for (int r = 1; r < n; ++r) {
    MemoryRunResult& ring = per_ring[r];
    scale(ring, w[r]);
    total.eta_storage += ring.eta_storage;
    total.eta_internal += ring.eta_internal;
    for (std::size_t k = 0; k < total.leakage_flux.size(); ++k)
      total.leakage_flux[k] += ring.leakage_flux[k];
    for (std::size_t k = 0; k < total.retrieval_flux.size(); ++k)
      total.retrieval_flux[k] += ring.retrieval_flux[k];
    total.spin_profile += ring.spin_profile;
    total.input_energy += ring.input_energy;
    total.leaked_energy += ring.leaked_energy;
    total.retrieved_energy += ring.retrieved_energy;
    total.decayed_energy += ring.decayed_energy;
    total.hold_loss += ring.hold_loss;
    total.residual_energy += ring.residual_energy;
  }
  return total;
}

}  // namespace lambdamem
