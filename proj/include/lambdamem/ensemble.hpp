#pragma once

#include "lambdamem/model.hpp"
#include "lambdamem/solver.hpp"

// Transverse averaging: the Gaussian beam overlap is decomposed into
// equal-signal-energy annuli, each simulated as an independent plane-wave
// problem whose control amplitude is sampled at the ring's energy-median
// radius. Velocity-class averaging happens inside each ring's solver run.

namespace lambdamem {

// Runs the storage protocol for every ring and combines the results with the
// signal energy weights. With n_rings = 1 (and unit control factor) this is
// exactly one run_protocol call. Per-ring failures are annotated with the
// ring index and rethrown.
MemoryRunResult ensemble_run(const LevelScheme& scheme,
                             const EnsembleConfig& config,
                             const PulseSpec& signal,
                             const PulseSpec& control_in,
                             const PulseSpec& control_out, double storage_time);

}  // namespace lambdamem
