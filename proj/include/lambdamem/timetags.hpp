#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lambdamem/counts.hpp"

// Raw detector time-tag processing: parsing, arrival-time histogramming
// against the herald channel, windowed counting, and the heralded HBT
// autocorrelation.

namespace lambdamem {

// Hardware clock granularity of the time tagger, ps.
inline constexpr std::int64_t kTaggerResolutionPs = 81;

struct TimeTagEvent {
  std::int64_t timestamp_ps = 0;
  std::uint16_t channel = 0; // 0 = herald, 1/2 = HBT detectors by convention
  friend bool operator==(const TimeTagEvent&, const TimeTagEvent&) = default;
};

struct Histogram {
  std::int64_t bin_width_ps = kTaggerResolutionPs;
  std::int64_t origin_ps = 0;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
};

enum class TagFormat { text_csv, binary_le };

// Parse statistics reported alongside the events.
struct ParseReport {
  std::size_t malformed = 0; // skipped lines / truncated trailing record
};

// text_csv: `timestamp_ps,channel` lines. binary_le: repeated 10-byte records,
// u64 little-endian picoseconds followed by u16 little-endian channel.
// Per-channel timestamps must be non-decreasing up to `order_tolerance_ps` of
// backtrack; a larger violation throws std::runtime_error.
std::vector<TimeTagEvent> parse_timetags(std::istream& in, TagFormat format,
                                         ParseReport* report = nullptr,
                                         std::int64_t order_tolerance_ps = 0);

void write_timetags(std::ostream& out, const std::vector<TimeTagEvent>& events,
                    TagFormat format);

// Histogram of (signal timestamp − most recent trigger timestamp) over
// [0, range_ps). Start–multi-stop: every signal event in range pairs with the
// latest preceding trigger. bin_width must be a positive multiple of the
// tagger resolution. Events need not be sorted; they are ordered internally.
Histogram arrival_histogram(const std::vector<TimeTagEvent>& events,
                            std::uint16_t trigger_ch, std::uint16_t signal_ch,
                            std::int64_t bin_width_ps, std::int64_t range_ps);

// Counts within [start_ps, start_ps + width_ps), on a histogram (partial bins
// are not split: a bin belongs to the window iff its start does) or directly
// on event-pair delays.
std::int64_t window_counts(const Histogram& hist, std::int64_t start_ps,
                           std::int64_t width_ps);

// Optional gate applied relative to each herald.
struct Gate {
  std::int64_t start_ps = 0;
  std::int64_t width_ps = 0;
};

// Heralded HBT estimator g²_c = (N_hAB · N_h)/(N_hA · N_hB), where N_hX counts
// heralds with at least one detection on X inside the coincidence window
// [h, h + window_ps), or inside the gate when one is given. Throws
// std::domain_error when the estimate is undefined (no singles).
Measured conditional_g2(const std::vector<TimeTagEvent>& events,
                        std::uint16_t herald_ch, std::uint16_t ch_a,
                        std::uint16_t ch_b, std::int64_t window_ps,
                        std::optional<Gate> gate = std::nullopt);

// Sums adjacent bins; factor must divide into the counts exactly (trailing
// partial groups are forbidden).
Histogram rebin(const Histogram& hist, int factor);

}  // namespace lambdamem
