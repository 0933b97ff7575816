#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lambdamem/model.hpp"

// Parameter studies over the storage protocol with per-point control–signal
// time alignment, reproducing the efficiency-vs-Rabi-frequency and
// efficiency-vs-waist curves.

namespace lambdamem {

enum class SweepAxis { rabi_peak, two_photon_detuning, control_waist, storage_time };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

// Axis units: rabi_peak and two_photon_detuning in MHz (converted by 2π),
// control_waist in µm, storage_time in ns.
struct SweepSpec {
  SweepAxis axis = SweepAxis::rabi_peak;
  std::vector<double> values; // non-empty, finite, strictly monotone
  bool align = true;          // optimize control timing per point
};

struct SweepRow {
  double value = 0.0;
  double eta_internal = 0.0;
  double eta_storage = 0.0;
  double best_offset_ns = 0.0;
  std::string status; // "ok", "flat", or "error: …"
};

// Base point with the axis value applied.
PhysicsPoint apply_axis(PhysicsPoint point, SweepAxis axis, double value);

struct AlignResult {
  double best_offset_ns = 0.0;
  double best_eta = 0.0;
  bool flat = false; // objective vanished everywhere scanned
};

// Derivative-free 1-D maximizer: coarse scan over ±half_range in coarse_step
// increments, then golden-section refinement of the bracketing interval down
// to `resolution`. Assumes the coarse grid catches the global maximum's basin.
AlignResult align_search(const std::function<double(double)>& objective,
                         double half_range, double coarse_step,
                         double resolution);

// Shifts the read-in control center over ±2×(signal.fwhm + control.fwhm) in
// 0.25 ns steps, refines to 10 ps, maximizing ensemble eta_internal. The
// read-out control mirrors the offset (handled by the protocol driver).
AlignResult optimize_alignment(const PhysicsPoint& point);

// Evaluates every axis value (ensemble run, alignment optimization when
// spec.align); per-point failures become "error: …" rows and the sweep
// continues. Row order follows spec.values. Throws std::domain_error for an
// empty/non-monotone/non-finite value list.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PhysicsPoint& base);

// CSV round-trip: header `axis,value,eta_internal,eta_storage,best_offset_ns,
// status`, values printed with round-trip precision so resumed sweeps can
// match completed rows exactly.
void write_sweep_csv(std::ostream& out, SweepAxis axis,
                     const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(std::istream& in);

}  // namespace lambdamem
