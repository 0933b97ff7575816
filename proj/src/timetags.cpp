#include "lambdamem/timetags.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace lambdamem {

std::int64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

namespace {

void check_order(std::unordered_map<std::uint16_t, std::int64_t>& last_seen,
                 const TimeTagEvent& ev, std::int64_t tolerance_ps) {
  auto [it, fresh] = last_seen.try_emplace(ev.channel, ev.timestamp_ps);
  if (!fresh) {
    if (ev.timestamp_ps + tolerance_ps < it->second)
      throw std::runtime_error(
          "parse_timetags: channel " + std::to_string(ev.channel) +
          " runs backwards at t = " + std::to_string(ev.timestamp_ps) + " ps");
    it->second = std::max(it->second, ev.timestamp_ps);
  }
}

std::vector<std::int64_t> sorted_channel_times(
    const std::vector<TimeTagEvent>& events, std::uint16_t channel) {
  std::vector<std::int64_t> times;
  for (const auto& ev : events)
    if (ev.channel == channel) times.push_back(ev.timestamp_ps);
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

std::vector<TimeTagEvent> parse_timetags(std::istream& in, TagFormat format,
                                         ParseReport* report,
                                         std::int64_t order_tolerance_ps) {
  std::vector<TimeTagEvent> events;
  ParseReport local;
  std::unordered_map<std::uint16_t, std::int64_t> last_seen;

  if (format == TagFormat::text_csv) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::int64_t ts;
      unsigned long channel;
      std::size_t pos = 0;
      try {
        ts = std::stoll(line, &pos);
      } catch (const std::exception&) {
        ++local.malformed;
        continue;
      }
      if (pos >= line.size() || line[pos] != ',') {
        ++local.malformed;
        continue;
      }
      try {
        std::size_t end = 0;
        channel = std::stoul(line.substr(pos + 1), &end);
        if (end == 0 || channel > 0xffff) {
          ++local.malformed;
          continue;
        }
      } catch (const std::exception&) {
        ++local.malformed;
        continue;
      }
      TimeTagEvent ev{ts, static_cast<std::uint16_t>(channel)};
      check_order(last_seen, ev, order_tolerance_ps);
      events.push_back(ev);
    }
  } else if (format == TagFormat::binary_le) {
    std::array<unsigned char, 10> record;
    while (in.read(reinterpret_cast<char*>(record.data()), record.size())) {
      std::uint64_t ts = 0;
      for (int b = 7; b >= 0; --b) ts = (ts << 8) | record[b];
      const std::uint16_t channel =
          static_cast<std::uint16_t>(record[8] | (record[9] << 8));
      TimeTagEvent ev{static_cast<std::int64_t>(ts), channel};
      check_order(last_seen, ev, order_tolerance_ps);
      events.push_back(ev);
    }
    if (in.gcount() > 0) ++local.malformed; // truncated trailing record
  } else {
    throw std::runtime_error("parse_timetags: unknown format");
  }

  if (report) *report = local;
  return events;
}

void write_timetags(std::ostream& out, const std::vector<TimeTagEvent>& events,
                    TagFormat format) {
  if (format == TagFormat::text_csv) {
    for (const auto& ev : events)
      out << ev.timestamp_ps << ',' << ev.channel << '\n';
    return;
  }
  for (const auto& ev : events) {
    std::array<unsigned char, 10> record;
    const std::uint64_t ts = static_cast<std::uint64_t>(ev.timestamp_ps);
    for (int b = 0; b < 8; ++b)
      record[b] = static_cast<unsigned char>((ts >> (8 * b)) & 0xff);
    record[8] = static_cast<unsigned char>(ev.channel & 0xff);
    record[9] = static_cast<unsigned char>(ev.channel >> 8);
    out.write(reinterpret_cast<const char*>(record.data()), record.size());
  }
}

Histogram arrival_histogram(const std::vector<TimeTagEvent>& events,
                            std::uint16_t trigger_ch, std::uint16_t signal_ch,
                            std::int64_t bin_width_ps, std::int64_t range_ps) {
  if (trigger_ch == signal_ch)
    throw std::domain_error("arrival_histogram: channels must be distinct");
  if (bin_width_ps <= 0 || bin_width_ps % kTaggerResolutionPs != 0)
    throw std::domain_error(
        "arrival_histogram: bin width must be a positive multiple of the "
        "tagger resolution");
  if (range_ps <= 0)
    throw std::domain_error("arrival_histogram: range must be positive");

  Histogram hist;
  hist.bin_width_ps = bin_width_ps;
  hist.origin_ps = 0;
  hist.counts.assign((range_ps + bin_width_ps - 1) / bin_width_ps, 0);

  const auto triggers = sorted_channel_times(events, trigger_ch);
  const auto signals = sorted_channel_times(events, signal_ch);
  if (triggers.empty()) return hist; // nothing to correlate against

  // Each signal pairs with the most recent trigger at or before it.
  for (const std::int64_t ts : signals) {
    auto it = std::upper_bound(triggers.begin(), triggers.end(), ts);
    if (it == triggers.begin()) continue; // signal precedes every trigger
    const std::int64_t delay = ts - *std::prev(it);
    if (delay >= range_ps) continue;
    ++hist.counts[static_cast<std::size_t>(delay / bin_width_ps)];
  }
  return hist;
}

std::int64_t window_counts(const Histogram& hist, std::int64_t start_ps,
                           std::int64_t width_ps) {
  if (width_ps <= 0)
    throw std::domain_error("window_counts: width must be positive");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const std::int64_t bin_start =
        hist.origin_ps + static_cast<std::int64_t>(i) * hist.bin_width_ps;
    if (bin_start >= start_ps && bin_start < start_ps + width_ps)
      total += hist.counts[i];
  }
  return total;
}

Measured conditional_g2(const std::vector<TimeTagEvent>& events,
                        std::uint16_t herald_ch, std::uint16_t ch_a,
                        std::uint16_t ch_b, std::int64_t window_ps,
                        std::optional<Gate> gate) {
  if (herald_ch == ch_a || herald_ch == ch_b || ch_a == ch_b)
    throw std::domain_error("conditional_g2: channels must be distinct");
  if (window_ps <= 0)
    throw std::domain_error("conditional_g2: window must be positive");
  if (gate && gate->width_ps <= 0)
    throw std::domain_error("conditional_g2: gate width must be positive");

  const auto heralds = sorted_channel_times(events, herald_ch);
  const auto a_times = sorted_channel_times(events, ch_a);
  const auto b_times = sorted_channel_times(events, ch_b);

  const std::int64_t rel_start = gate ? gate->start_ps : 0;
  const std::int64_t rel_width = gate ? gate->width_ps : window_ps;

  auto hit = [&](const std::vector<std::int64_t>& times, std::int64_t h) {
    const std::int64_t lo = h + rel_start;
    auto it = std::lower_bound(times.begin(), times.end(), lo);
    return it != times.end() && *it < lo + rel_width;
  };

  std::int64_t n_ha = 0, n_hb = 0, n_hab = 0;
  for (const std::int64_t h : heralds) {
    const bool a = hit(a_times, h);
    const bool b = hit(b_times, h);
    n_ha += a;
    n_hb += b;
    n_hab += a && b;
  }
  if (n_ha == 0 || n_hb == 0)
    throw std::domain_error("conditional_g2: no singles on one of the arms");

  const double n_h = static_cast<double>(heralds.size());
  const double value = static_cast<double>(n_hab) * n_h /
                       (static_cast<double>(n_ha) * static_cast<double>(n_hb));
  // Poisson on the coincidence classes; the herald total is the conditioning
  // denominator. A zero-coincidence result carries a one-count error scale.
  const double scale = n_h / (static_cast<double>(n_ha) * static_cast<double>(n_hb));
  const double sigma =
      n_hab > 0
          ? value * std::sqrt(1.0 / n_hab + 1.0 / n_ha + 1.0 / n_hb)
          : scale;
  return {value, sigma};
}

Histogram rebin(const Histogram& hist, int factor) {
  if (factor <= 0) throw std::domain_error("rebin: factor must be positive");
  if (hist.counts.size() % static_cast<std::size_t>(factor) != 0)
    throw std::domain_error("rebin: factor must divide the bin count");
  Histogram out;
  out.bin_width_ps = hist.bin_width_ps * factor;
  out.origin_ps = hist.origin_ps;
  out.counts.resize(hist.counts.size() / factor, 0);
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out.counts[i / factor] += hist.counts[i];
  return out;
}

}  // namespace lambdamem
