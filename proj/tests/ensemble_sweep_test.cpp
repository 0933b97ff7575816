#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "lambdamem/config.hpp"
#include "lambdamem/ensemble.hpp"
#include "lambdamem/sweep.hpp"
#include "lambdamem/units.hpp"

using namespace lambdamem;

namespace {

// Small but physical operating point for fast ensemble runs.
PhysicsPoint reduced_point() {
  PhysicsPoint p = resolve(default_experiment_config());
  p.ensemble.n_velocity_classes = 4;
  p.ensemble.n_rings = 2;
  p.ensemble.n_z = 24;
  p.ensemble.dt = 0.02;
  return p;
}

}  // namespace

TEST_CASE("one ring with matched waists reduces to a single protocol run") {
  PhysicsPoint p = reduced_point();
  p.ensemble.n_rings = 1;
  p.ensemble.n_velocity_classes = 2;

  const MemoryRunResult ens =
      ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in, p.control_out,
                   p.storage_time);
  const MemoryRunResult one = run_protocol(p.scheme, p.ensemble, p.signal,
                                           p.control_in, p.control_out,
                                           p.storage_time);
  CHECK(ens.eta_internal == doctest::Approx(one.eta_internal).epsilon(1e-13));
  CHECK(ens.eta_storage == doctest::Approx(one.eta_storage).epsilon(1e-13));
  CHECK(ens.input_energy == doctest::Approx(one.input_energy).epsilon(1e-13));
  CHECK(ens.leaked_energy ==
        doctest::Approx(one.leaked_energy).epsilon(1e-13));
  CHECK(ens.retrieved_energy ==
        doctest::Approx(one.retrieved_energy).epsilon(1e-13));
  REQUIRE(ens.retrieval_flux.size() == one.retrieval_flux.size());
  double max_diff = 0.0;
  for (size_t i = 0; i < ens.retrieval_flux.size(); ++i)
    max_diff = std::max(max_diff,
                        std::abs(ens.retrieval_flux[i] - one.retrieval_flux[i]));
  CHECK(max_diff < 1e-13);
}

TEST_CASE("Doppler averaging costs efficiency") {
  PhysicsPoint p = reduced_point();
  p.ensemble.n_rings = 1;

  PhysicsPoint frozen = p;
  frozen.ensemble.n_velocity_classes = 1; // single class at zero velocity

  const MemoryRunResult warm =
      ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in, p.control_out,
                   0.0);
  const MemoryRunResult cold =
      ensemble_run(frozen.scheme, frozen.ensemble, frozen.signal,
                   frozen.control_in, frozen.control_out, 0.0);
  CHECK(warm.eta_internal > 0.0);
  CHECK(warm.eta_internal < cold.eta_internal);
}

TEST_CASE("a wider control beam helps at high Rabi frequency") {
  // each point gets its own timing optimization — the light shift moves the
  // optimal control arrival, so fixed timing would confound the comparison
  PhysicsPoint p = reduced_point();
  p.ensemble.n_velocity_classes = 2;
  p.ensemble.n_rings = 3;
  p.ensemble.dt = 0.05;
  p.control_in.peak_amplitude = mhz_to_radns(600.0);
  p.control_out.peak_amplitude = mhz_to_radns(600.0);

  PhysicsPoint wide = p;
  wide.ensemble.control_waist = 2.0 * p.ensemble.control_waist;

  const AlignResult narrow = optimize_alignment(p);
  const AlignResult broad = optimize_alignment(wide);
  CHECK(broad.best_eta > narrow.best_eta);
}

TEST_CASE("result does not depend on the worker count") {
  PhysicsPoint p = reduced_point();

  setenv("LAMBDAMEM_WORKERS", "1", 1);
  const MemoryRunResult serial =
      ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in, p.control_out,
                   p.storage_time);
  setenv("LAMBDAMEM_WORKERS", "3", 1);
  const MemoryRunResult threaded =
      ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in, p.control_out,
                   p.storage_time);
  unsetenv("LAMBDAMEM_WORKERS");

  CHECK(serial.eta_internal == threaded.eta_internal);
  CHECK(serial.eta_storage == threaded.eta_storage);
  CHECK(serial.retrieved_energy == threaded.retrieved_energy);
}

TEST_CASE("alignment search finds analytic optima") {
  SUBCASE("centered peak") {
    const AlignResult r = align_search(
        [](double x) { return std::exp(-x * x); }, 3.0, 0.25, 0.01);
    CHECK(!r.flat);
    CHECK(std::abs(r.best_offset_ns) <= 0.0101);
    CHECK(r.best_eta == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("shifted peak") {
    const AlignResult r = align_search(
        [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); }, 3.0, 0.25,
        0.01);
    CHECK(!r.flat);
    CHECK(r.best_offset_ns == doctest::Approx(0.5).epsilon(0.025));
  }
  SUBCASE("flat objective") {
    const AlignResult r =
        align_search([](double) { return 0.0; }, 3.0, 0.25, 0.01);
    CHECK(r.flat);
    CHECK(r.best_offset_ns == 0.0);
  }
  SUBCASE("two humps: picks the taller one") {
    const AlignResult r = align_search(
        [](double x) {
          return std::exp(-(x + 1.0) * (x + 1.0)) +
                 0.5 * std::exp(-(x - 1.2) * (x - 1.2));
        },
        3.0, 0.25, 0.005);
    CHECK(r.best_offset_ns == doctest::Approx(-1.0).epsilon(0.03));
  }
}

TEST_CASE("timing optimization beats the unshifted point") {
  PhysicsPoint p = reduced_point();
  p.ensemble.n_rings = 1;
  p.ensemble.n_velocity_classes = 2;

  const AlignResult best = optimize_alignment(p);
  const MemoryRunResult at_zero =
      ensemble_run(p.scheme, p.ensemble, p.signal, p.control_in, p.control_out,
                   p.storage_time);
  CHECK(!best.flat);
  CHECK(best.best_eta >= at_zero.eta_internal * (1.0 - 1e-12));

  PhysicsPoint far = p;
  far.control_in.center += 4.0; // control long gone when the signal arrives
  const MemoryRunResult detached =
      ensemble_run(far.scheme, far.ensemble, far.signal, far.control_in,
                   far.control_out, far.storage_time);
  CHECK(best.best_eta > 2.0 * detached.eta_internal);
}

TEST_CASE("axis application converts units onto the right fields") {
  const PhysicsPoint base = resolve(default_experiment_config());

  const PhysicsPoint om = apply_axis(base, SweepAxis::rabi_peak, 600.0);
  CHECK(om.control_in.peak_amplitude ==
        doctest::Approx(mhz_to_radns(600.0)).epsilon(1e-15));
  CHECK(om.control_out.peak_amplitude ==
        doctest::Approx(mhz_to_radns(600.0)).epsilon(1e-15));
  CHECK(om.signal.peak_amplitude == base.signal.peak_amplitude);

  const PhysicsPoint dt2 =
      apply_axis(base, SweepAxis::two_photon_detuning, -65.0);
  CHECK(dt2.scheme.delta_twophoton ==
        doctest::Approx(mhz_to_radns(-65.0)).epsilon(1e-15));
  CHECK(dt2.scheme.delta_signal == base.scheme.delta_signal);

  const PhysicsPoint w = apply_axis(base, SweepAxis::control_waist, 520.0);
  CHECK(w.ensemble.control_waist == 520.0);
  CHECK(w.ensemble.signal_waist == base.ensemble.signal_waist);

  const PhysicsPoint st = apply_axis(base, SweepAxis::storage_time, 320.0);
  CHECK(st.storage_time == 320.0);
}

TEST_CASE("axis names round-trip and reject unknowns") {
  for (SweepAxis axis :
       {SweepAxis::rabi_peak, SweepAxis::two_photon_detuning,
        SweepAxis::control_waist, SweepAxis::storage_time}) {
    CHECK(sweep_axis_from_string(to_string(axis)) == axis);
  }
  CHECK_THROWS_AS(sweep_axis_from_string("waist"), std::invalid_argument);
}

TEST_CASE("sweep value lists are validated") {
  const PhysicsPoint base = reduced_point();
  SweepSpec spec;
  spec.axis = SweepAxis::storage_time;

  spec.values = {};
  CHECK_THROWS_AS(run_sweep(spec, base), std::domain_error);
  spec.values = {1.0, 3.0, 2.0};
  CHECK_THROWS_AS(run_sweep(spec, base), std::domain_error);
  spec.values = {1.0, std::nan("")};
  CHECK_THROWS_AS(run_sweep(spec, base), std::domain_error);
}

TEST_CASE("storage-time sweep reproduces the lifetime decay") {
  // one velocity class: no residual-Doppler dephasing on top of the
  // configured exponential, so the ratio law is exact
  PhysicsPoint base = reduced_point();
  base.ensemble.n_rings = 1;
  base.ensemble.n_velocity_classes = 1;

  SweepSpec spec;
  spec.axis = SweepAxis::storage_time;
  spec.values = {0.0, 340.0, 680.0};
  spec.align = false;

  const std::vector<SweepRow> rows = run_sweep(spec, base);
  REQUIRE(rows.size() == 3);
  for (const SweepRow& row : rows) CHECK(row.status == "ok");
  CHECK(rows[1].eta_internal / rows[0].eta_internal ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  CHECK(rows[2].eta_internal / rows[0].eta_internal ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  // descending order is fine too, and must give the same physics
  SweepSpec rev = spec;
  rev.values = {680.0, 340.0, 0.0};
  const std::vector<SweepRow> back = run_sweep(rev, base);
  CHECK(back[2].eta_internal == rows[0].eta_internal);
}

TEST_CASE("zero control power is a valid sweep point") {
  PhysicsPoint base = reduced_point();
  base.ensemble.n_rings = 1;
  base.ensemble.n_velocity_classes = 1;

  SweepSpec spec;
  spec.axis = SweepAxis::rabi_peak;
  spec.values = {0.0};
  spec.align = false;

  const std::vector<SweepRow> rows = run_sweep(spec, base);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].eta_internal == 0.0);
}

TEST_CASE("sweeps are deterministic") {
  PhysicsPoint base = reduced_point();
  base.ensemble.n_rings = 1;
  base.ensemble.n_velocity_classes = 2;

  SweepSpec spec;
  spec.axis = SweepAxis::rabi_peak;
  spec.values = {300.0, 400.0};
  spec.align = false;

  const std::vector<SweepRow> a = run_sweep(spec, base);
  const std::vector<SweepRow> b = run_sweep(spec, base);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].eta_internal == b[i].eta_internal);
    CHECK(a[i].eta_storage == b[i].eta_storage);
    CHECK(a[i].best_offset_ns == b[i].best_offset_ns);
  }
}

TEST_CASE("sweep CSV writes and parses losslessly") {
  // eta columns are written with 10 significant digits and the offset with
  // 6 decimals, so values at that precision round-trip exactly
  std::vector<SweepRow> rows(3);
  rows[0] = {50.0, 1.23456789e-4, 0.0321, -0.59, "ok"};
  rows[1] = {400.0, 0.010834, 0.2424, 0.0, "flat"};
  rows[2] = {800.0, 0.0, 0.0, 0.0, "error: ring 2, class 3: not finite"};

  std::ostringstream out;
  write_sweep_csv(out, SweepAxis::rabi_peak, rows);
  std::istringstream in(out.str());
  const std::vector<SweepRow> parsed = parse_sweep_csv(in);

  REQUIRE(parsed.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].value == rows[i].value);
    CHECK(parsed[i].eta_internal == rows[i].eta_internal);
    CHECK(parsed[i].eta_storage == rows[i].eta_storage);
    CHECK(parsed[i].best_offset_ns == rows[i].best_offset_ns);
    CHECK(parsed[i].status == rows[i].status);
  }
  std::ostringstream again;
  write_sweep_csv(again, SweepAxis::rabi_peak, parsed);
  CHECK(again.str() == out.str());
}
