#include "lambdamem/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "lambdamem/ensemble.hpp"
#include "lambdamem/parallel.hpp"
#include "lambdamem/units.hpp"

namespace lambdamem {

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::rabi_peak: return "rabi_peak";
    case SweepAxis::two_photon_detuning: return "two_photon_detuning";
    case SweepAxis::control_waist: return "control_waist";
    case SweepAxis::storage_time: return "storage_time";
  }
  return "rabi_peak";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "rabi_peak") return SweepAxis::rabi_peak;
  if (name == "two_photon_detuning") return SweepAxis::two_photon_detuning;
  if (name == "control_waist") return SweepAxis::control_waist;
  if (name == "storage_time") return SweepAxis::storage_time;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

PhysicsPoint apply_axis(PhysicsPoint point, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::rabi_peak:
      point.control_in.peak_amplitude = mhz_to_radns(value);
      point.control_out.peak_amplitude = mhz_to_radns(value);
      break;
    case SweepAxis::two_photon_detuning:
      point.scheme.delta_twophoton = mhz_to_radns(value);
      break;
    case SweepAxis::control_waist:
      point.ensemble.control_waist = value;
      break;
    case SweepAxis::storage_time:
      point.storage_time = value;
      break;
  }
  return point;
}

AlignResult align_search(const std::function<double(double)>& objective,
                         double half_range, double coarse_step,
                         double resolution) {
  if (half_range <= 0.0 || coarse_step <= 0.0 || resolution <= 0.0)
    throw std::domain_error("align_search: ranges must be positive");

  const int n = 2 * static_cast<int>(std::round(half_range / coarse_step)) + 1;
  double best_x = 0.0, best_f = -1.0;
  int best_i = 0;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = -half_range + i * coarse_step;
    const double f = objective(xs[i]);
    if (f > best_f) {
      best_f = f;
      best_x = xs[i];
      best_i = i;
    }
  }
  if (best_f <= 0.0) return {0.0, 0.0, true}; // nothing to optimize against

  // Golden-section refinement inside the bracketing coarse interval.
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = xs[std::max(0, best_i - 1)];
  double hi = xs[std::min(n - 1, best_i + 1)];
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  auto track = [&](double x, double f) {
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  };
  track(x1, f1);
  track(x2, f2);
  while (hi - lo > 2.0 * resolution) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
      track(x2, f2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
      track(x1, f1);
    }
  }
  return {best_x, best_f, false};
}

AlignResult optimize_alignment(const PhysicsPoint& point) {
  auto objective = [&](double offset) {
    PhysicsPoint p = point;
    p.control_in.center = point.signal.center + offset;
    return ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in,
                        p.control_out, p.storage_time)
        .eta_internal;
  };
  const double half_range = 2.0 * (point.signal.fwhm + point.control_in.fwhm);
  return align_search(objective, half_range, 0.25, 0.010);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PhysicsPoint& base) {
  if (spec.values.empty())
    throw std::domain_error("run_sweep: value list is empty");
  bool increasing = true, decreasing = true;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (!std::isfinite(spec.values[i]))
      throw std::domain_error("run_sweep: values must be finite");
    if (i > 0) {
      increasing &= spec.values[i] > spec.values[i - 1];
      decreasing &= spec.values[i] < spec.values[i - 1];
    }
  }
  if (spec.values.size() > 1 && !increasing && !decreasing)
    throw std::domain_error("run_sweep: values must be strictly monotone");

  std::vector<SweepRow> rows(spec.values.size());
  parallel_for(static_cast<int>(spec.values.size()), [&](int i) {
    SweepRow& row = rows[i];
    row.value = spec.values[i];
    try {
      const PhysicsPoint point = apply_axis(base, spec.axis, spec.values[i]);
      double offset = point.control_in.center - point.signal.center;
      bool flat = false;
      if (spec.align) {
        const AlignResult aligned = optimize_alignment(point);
        offset = aligned.best_offset_ns;
        flat = aligned.flat;
      }
      PhysicsPoint best = point;
      best.control_in.center = point.signal.center + offset;
      const MemoryRunResult result =
          ensemble_run(best.scheme, best.ensemble, best.signal, best.control_in,
                       best.control_out, best.storage_time);
      row.eta_internal = result.eta_internal;
      row.eta_storage = result.eta_storage;
      row.best_offset_ns = offset;
      row.status = flat ? "flat" : "ok";
    } catch (const std::exception& e) {
      row.eta_internal = row.eta_storage = row.best_offset_ns =
          std::numeric_limits<double>::quiet_NaN();
      row.status = std::string("error: ") + e.what();
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis,
                     const std::vector<SweepRow>& rows) {
  out << "axis,value,eta_internal,eta_storage,best_offset_ns,status\n";
  const std::string name = to_string(axis);
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.10g,%.10g,%.6f,%s\n",
                  name.c_str(), row.value, row.eta_internal, row.eta_storage,
                  row.best_offset_ns, row.status.c_str());
    out << buf;
  }
}

std::vector<SweepRow> parse_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) { // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    SweepRow row;
    std::size_t pos = line.find(',');
    if (pos == std::string::npos) continue; // axis name column
    std::string rest = line.substr(pos + 1);
    char status[128] = {0};
    const int got =
        std::sscanf(rest.c_str(), "%lf,%lf,%lf,%lf,%127[^\n]", &row.value,
                    &row.eta_internal, &row.eta_storage, &row.best_offset_ns,
                    status);
    if (got < 5) continue;
    row.status = status;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lambdamem
