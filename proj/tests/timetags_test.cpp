#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "lambdamem/timetags.hpp"

using namespace lambdamem;

namespace {

// Start–multi-stop pairing done the obvious O(n²) way, as an oracle.
Histogram brute_force_histogram(std::vector<TimeTagEvent> events,
                                std::uint16_t trig, std::uint16_t sig,
                                std::int64_t bin_width, std::int64_t range) {
  std::sort(events.begin(), events.end(),
            [](const TimeTagEvent& a, const TimeTagEvent& b) {
              return a.timestamp_ps < b.timestamp_ps;
            });
  Histogram h;
  h.bin_width_ps = bin_width;
  h.origin_ps = 0;
  h.counts.assign(static_cast<std::size_t>((range + bin_width - 1) / bin_width),
                  0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].channel != sig) continue;
    std::int64_t best = INT64_MIN;
    for (std::size_t j = 0; j < events.size(); ++j) {
      if (events[j].channel != trig) continue;
      if (events[j].timestamp_ps <= events[i].timestamp_ps)
        best = std::max(best, events[j].timestamp_ps);
    }
    if (best == INT64_MIN) continue;
    const std::int64_t delay = events[i].timestamp_ps - best;
    if (delay < 0 || delay >= range) continue;
    ++h.counts[static_cast<std::size_t>(delay / bin_width)];
  }
  return h;
}

}  // namespace

TEST_CASE("text tags round-trip and malformed lines are counted") {
  std::vector<TimeTagEvent> events = {
      {0, 0}, {1215, 1}, {4050, 2}, {81000, 0}, {81081, 1}};
  std::ostringstream out;
  write_timetags(out, events, TagFormat::text_csv);

  std::string text = out.str();
  text += "garbage line\n12345\n";
  std::istringstream in(text);
  ParseReport report;
  const std::vector<TimeTagEvent> back =
      parse_timetags(in, TagFormat::text_csv, &report);
  CHECK(back == events);
  CHECK(report.malformed == 2);
}

TEST_CASE("binary tags round-trip bit exactly") {
  std::mt19937_64 rng(7u);
  std::vector<TimeTagEvent> events;
  std::int64_t t0 = 0, t1 = 0, t2 = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::uint16_t ch = static_cast<std::uint16_t>(rng() % 3);
    std::int64_t& t = ch == 0 ? t0 : (ch == 1 ? t1 : t2);
    t += static_cast<std::int64_t>(rng() % 5000) * kTaggerResolutionPs;
    events.push_back({t, ch});
  }
  std::ostringstream out(std::ios::binary);
  write_timetags(out, events, TagFormat::binary_le);
  const std::string bytes = out.str();
  CHECK(bytes.size() == events.size() * 10);

  std::istringstream in(bytes, std::ios::binary);
  ParseReport report;
  const std::vector<TimeTagEvent> back =
      parse_timetags(in, TagFormat::binary_le, &report);
  CHECK(back == events);
  CHECK(report.malformed == 0);

  // a truncated trailing record is reported, not fatal
  std::istringstream cut(bytes.substr(0, bytes.size() - 3), std::ios::binary);
  const std::vector<TimeTagEvent> partial =
      parse_timetags(cut, TagFormat::binary_le, &report);
  CHECK(partial.size() == events.size() - 1);
  CHECK(report.malformed == 1);
}

TEST_CASE("per-channel time ordering is enforced with tolerance") {
  std::ostringstream out;
  write_timetags(out,
                 {{1000, 0}, {900, 1}, {2000, 0}, {1950, 1}},
                 TagFormat::text_csv);
  // channel 1 going 900 -> 1950 is fine; channel 0 going 1000 -> 2000 fine
  std::istringstream ok_in(out.str());
  CHECK_NOTHROW(parse_timetags(ok_in, TagFormat::text_csv));

  std::ostringstream bad;
  write_timetags(bad, {{1000, 0}, {900, 0}}, TagFormat::text_csv);
  std::istringstream bad_in(bad.str());
  CHECK_THROWS_AS(parse_timetags(bad_in, TagFormat::text_csv),
                  std::runtime_error);

  // the same backtrack passes when within the stated tolerance
  std::istringstream tol_in(bad.str());
  CHECK_NOTHROW(parse_timetags(tol_in, TagFormat::text_csv, nullptr, 100));
}

TEST_CASE("histogram matches the brute-force pairing oracle") {
  std::mt19937_64 rng(20260819u);
  std::vector<TimeTagEvent> events;
  std::int64_t t = 0;
  for (int i = 0; i < 10000; ++i) {
    t += static_cast<std::int64_t>(rng() % 4000) * kTaggerResolutionPs;
    events.push_back({t, static_cast<std::uint16_t>(rng() % 2)});
  }
  const std::int64_t bin = 2 * kTaggerResolutionPs;
  const std::int64_t range = 3000 * kTaggerResolutionPs;

  const Histogram fast = arrival_histogram(events, 0, 1, bin, range);
  const Histogram slow = brute_force_histogram(events, 0, 1, bin, range);

  REQUIRE(fast.counts.size() == slow.counts.size());
  CHECK(fast.bin_width_ps == bin);
  for (std::size_t i = 0; i < fast.counts.size(); ++i) {
    CAPTURE(i);
    CHECK(fast.counts[i] == slow.counts[i]);
  }
  CHECK(fast.total() == slow.total());
}

TEST_CASE("histogram input order does not matter") {
  std::vector<TimeTagEvent> events = {
      {0, 0}, {162, 1}, {400000, 0}, {400081, 1}, {400162, 1}};
  std::vector<TimeTagEvent> shuffled = {events[3], events[0], events[4],
                                        events[2], events[1]};
  const Histogram a = arrival_histogram(events, 0, 1, 162, 243000);
  const Histogram b = arrival_histogram(shuffled, 0, 1, 162, 243000);
  CHECK(a.counts == b.counts);
  CHECK(a.total() == 3);
}

TEST_CASE("histogram validates its grid") {
  const std::vector<TimeTagEvent> events = {{0, 0}, {162, 1}};
  CHECK_THROWS_AS(arrival_histogram(events, 0, 0, 162, 1000),
                  std::domain_error); // channels must differ
  CHECK_THROWS_AS(arrival_histogram(events, 0, 1, 100, 1000),
                  std::domain_error); // not a resolution multiple
  CHECK_THROWS_AS(arrival_histogram(events, 0, 1, 162, 0), std::domain_error);
}

TEST_CASE("window counting follows the bin-start rule") {
  Histogram h;
  h.bin_width_ps = 100;
  h.origin_ps = 0;
  h.counts = {1, 2, 4, 8, 16};
  // window [100, 300): bins starting at 100 and 200
  CHECK(window_counts(h, 100, 200) == 6);
  // window [150, 350): bin 100 starts before the window, bin 300 inside
  CHECK(window_counts(h, 150, 200) == 12);
  // full cover and beyond
  CHECK(window_counts(h, 0, 100000) == 31);
  // empty window
  CHECK(window_counts(h, 500, 100) == 0);
  CHECK_THROWS_AS(window_counts(h, 0, 0), std::domain_error);
}

TEST_CASE("rebinning sums adjacent bins exactly") {
  Histogram h;
  h.bin_width_ps = 81;
  h.origin_ps = 0;
  h.counts = {1, 2, 3, 4, 5, 6};
  const Histogram r = rebin(h, 3);
  CHECK(r.bin_width_ps == 243);
  REQUIRE(r.counts.size() == 2);
  CHECK(r.counts[0] == 6);
  CHECK(r.counts[1] == 15);
  CHECK(r.total() == h.total());
  CHECK_THROWS_AS(rebin(h, 4), std::domain_error); // 4 does not divide 6
  CHECK_THROWS_AS(rebin(h, 0), std::domain_error);
}

TEST_CASE("coherent statistics give unit conditional autocorrelation") {
  // independent detections on A and B behind a herald: g2_c -> 1
  std::mt19937_64 rng(99u);
  std::vector<TimeTagEvent> events;
  const std::int64_t period = 10 * 6480;
  const int n_heralds = 20000;
  const double p = 0.2;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long long na = 0, nb = 0, nab = 0;
  for (int i = 0; i < n_heralds; ++i) {
    const std::int64_t t = i * period;
    events.push_back({t, 0});
    const bool hit_a = u(rng) < p;
    const bool hit_b = u(rng) < p;
    if (hit_a) events.push_back({t + 162, 1});
    if (hit_b) events.push_back({t + 243, 2});
    na += hit_a;
    nb += hit_b;
    nab += hit_a && hit_b;
  }
  const Measured g2 = conditional_g2(events, 0, 1, 2, 6480);
  const double exact = double(nab) * n_heralds / (double(na) * nb);
  CHECK(g2.value == doctest::Approx(exact).epsilon(1e-12));
  CHECK(std::abs(g2.value - 1.0) < 3.0 * g2.sigma);
  CHECK(g2.sigma < 0.05);
}

TEST_CASE("a single photon routed to one arm never coincides") {
  std::mt19937_64 rng(123u);
  std::vector<TimeTagEvent> events;
  const std::int64_t period = 100000;
  for (int i = 0; i < 5000; ++i) {
    const std::int64_t t = i * period;
    events.push_back({t, 0});
    events.push_back({t + 810, (rng() & 1) ? std::uint16_t(1) : std::uint16_t(2)});
  }
  const Measured g2 = conditional_g2(events, 0, 1, 2, 6480);
  CHECK(g2.value == 0.0);
  CHECK(g2.sigma > 0.0); // one-count-level upper bound, not a claim of zero
}

TEST_CASE("noise admixture reproduces the enumerated mixture value") {
  // Herald-synchronized source: one photon with probability p1, two with
  // probability p2 = g2_in*p1^2/2, plus thermal noise with mean mu per
  // window, all split 50/50 onto the two detectors.
  const double p1 = 0.4;
  const double g2_in = 0.0421;
  const double p2 = g2_in * p1 * p1 / 2.0;
  const double mu = (p1 + 2.0 * p2) / 10.8;

  // exact per-herald outcome enumeration over photon number n = source + noise
  // detection: each photon independently picks A or B with probability 1/2
  double pa = 0.0, pab = 0.0;
  const double pnone = 1.0 - p1 - p2;
  for (int src = 0; src <= 2; ++src) {
    const double psrc = src == 0 ? pnone : (src == 1 ? p1 : p2);
    // thermal (geometric/Bose) noise photon number, truncated far in the tail
    for (int nn = 0; nn <= 40; ++nn) {
      const double pth =
          std::pow(mu / (1.0 + mu), nn) / (1.0 + mu);
      const int n = src + nn;
      const double p_no_a = std::pow(0.5, n); // all photons miss A
      pa += psrc * pth * (1.0 - p_no_a);
      // P(A>=1 and B>=1) = 1 - 2*(1/2)^n + 0  (0^n term only at n=0)
      const double p_both =
          1.0 - 2.0 * std::pow(0.5, n) + (n == 0 ? 1.0 : 0.0);
      pab += psrc * pth * p_both;
    }
  }
  const double exact_g2 = pab / (pa * pa);
  CHECK(exact_g2 == doctest::Approx(0.201429).epsilon(1e-4));

  // simulate the same mixture as tag streams and compare
  std::mt19937_64 rng(20260819u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TimeTagEvent> events;
  const std::int64_t period = 20 * 6480;
  const int n_heralds = 200000;
  for (int i = 0; i < n_heralds; ++i) {
    const std::int64_t t = i * period;
    events.push_back({t, 0});
    int n = 0;
    const double r = u(rng);
    if (r < p2)
      n = 2;
    else if (r < p2 + p1)
      n = 1;
    // thermal: geometric with success 1/(1+mu)
    while (u(rng) < mu / (1.0 + mu)) ++n;
    std::int64_t ta = t + 162, tb = t + 162;
    for (int k = 0; k < n; ++k) {
      if (u(rng) < 0.5) {
        events.push_back({ta, 1});
        ta += 81;
      } else {
        events.push_back({tb, 2});
        tb += 81;
      }
    }
  }
  const Measured g2 = conditional_g2(events, 0, 1, 2, 6480);
  CHECK(std::abs(g2.value - exact_g2) < 3.0 * g2.sigma);
  CHECK(g2.sigma < 0.02);
}

TEST_CASE("conditional g2 is invariant under global time translation") {
  std::mt19937_64 rng(5u);
  std::vector<TimeTagEvent> events;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    const std::int64_t t = i * 50000;
    events.push_back({t, 0});
    if (u(rng) < 0.3) events.push_back({t + 81, 1});
    if (u(rng) < 0.3) events.push_back({t + 162, 2});
  }
  const Measured base = conditional_g2(events, 0, 1, 2, 6480);
  std::vector<TimeTagEvent> shifted = events;
  for (TimeTagEvent& e : shifted) e.timestamp_ps += 12345678;
  const Measured moved = conditional_g2(shifted, 0, 1, 2, 6480);
  CHECK(base.value == moved.value);
  CHECK(base.sigma == moved.sigma);
}

TEST_CASE("gating selects the retrieval window") {
  // photons at two delays; the gate isolates the later group
  std::vector<TimeTagEvent> events;
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t t = i * 100000;
    events.push_back({t, 0});
    // early pair on both arms (would give huge coincidence rate)
    events.push_back({t + 810, 1});
    events.push_back({t + 891, 2});
    // late photon alternating arms (perfectly antibunched)
    events.push_back({t + 8100, (i & 1) ? std::uint16_t(1) : std::uint16_t(2)});
  }
  const Measured ungated = conditional_g2(events, 0, 1, 2, 100000);
  CHECK(ungated.value > 0.5);
  const Measured gated =
      conditional_g2(events, 0, 1, 2, 100000, Gate{8000, 1000});
  CHECK(gated.value == 0.0);

  CHECK_THROWS_AS(conditional_g2(events, 0, 1, 2, 100000, Gate{8000, 0}),
                  std::domain_error);
  // no singles inside the gate -> estimator undefined
  CHECK_THROWS_AS(conditional_g2(events, 0, 1, 2, 100000, Gate{90000, 100}),
                  std::domain_error);
}
