#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tero/date.hpp"
#include "tero/error.hpp"

namespace tero {

// Surjection from calendar dates onto time-step indices [0, size()).
//
// FixedUnit: consecutive runs of `unit` days starting at the origin.
// Boundaries hold the first day number of each step.
// Threshold: runs of whole years; boundaries hold the first year of each
// step. Month and day are ignored.
class TimeBinning {
 public:
  enum class Mode { FixedUnit, Threshold };

  TimeBinning() = default;

  static TimeBinning fixed_unit(std::int64_t first_day, std::int64_t last_day, std::int64_t unit) {
    if (unit < 1) throw UsageError("time unit must be >= 1 day");
    if (last_day < first_day) throw UsageError("empty time span");
    TimeBinning b;
    b.mode_ = Mode::FixedUnit;
    b.parameter_ = unit;
    b.last_ = last_day;
    std::int64_t span = last_day - first_day + 1;
    std::int64_t n = (span + unit - 1) / unit;
    b.starts_.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) b.starts_.push_back(first_day + i * unit);
    return b;
  }

  static TimeBinning threshold(std::vector<std::int64_t> start_years, std::int64_t last_year,
                               std::int64_t thre) {
    if (start_years.empty()) throw UsageError("threshold binning needs at least one step");
    if (!std::is_sorted(start_years.begin(), start_years.end()) ||
        std::adjacent_find(start_years.begin(), start_years.end()) != start_years.end() ||
        last_year < start_years.back()) {
      throw UsageError("threshold boundaries must be strictly increasing");
    }
    TimeBinning b;
    b.mode_ = Mode::Threshold;
    b.parameter_ = thre;
    b.last_ = last_year;
    b.starts_ = std::move(start_years);
    return b;
  }

  Mode mode() const { return mode_; }
  // Unit in days for FixedUnit, minimum count for Threshold.
  std::int64_t parameter() const { return parameter_; }
  std::int32_t size() const { return static_cast<std::int32_t>(starts_.size()); }
  const std::vector<std::int64_t>& boundaries() const { return starts_; }
  // Last day number (FixedUnit) or year (Threshold) covered.
  std::int64_t last() const { return last_; }

  std::int64_t key(const Date& d) const {
    return mode_ == Mode::FixedUnit ? day_number(d) : static_cast<std::int64_t>(d.year);
  }

  std::int32_t step(const Date& d) const {
    std::int64_t k = key(d);
    if (starts_.empty()) throw UsageError("empty time binning");
    if (k < starts_.front()) {
      throw DataError("date " + format_date(d) + " precedes the binning origin");
    }
    if (k > last_) {
      throw DataError("date " + format_date(d) + " lies after the binning span");
    }
    if (mode_ == Mode::FixedUnit) {
      return static_cast<std::int32_t>((k - starts_.front()) / parameter_);
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), k);
    return static_cast<std::int32_t>(it - starts_.begin()) - 1;
  }

  friend bool operator==(const TimeBinning&, const TimeBinning&) = default;

 private:
  Mode mode_ = Mode::FixedUnit;
  std::int64_t parameter_ = 1;
  std::int64_t last_ = 0;
  std::vector<std::int64_t> starts_;
};

// Fixed-length steps of `unit` days from `origin` through the latest date.
inline TimeBinning bin_fixed(std::span<const Date> dates, std::int64_t unit, const Date& origin) {
  if (unit < 1) throw UsageError("time unit must be >= 1 day");
  if (dates.empty()) throw UsageError("no dates to bin");
  std::int64_t first = day_number(origin);
  std::int64_t last = first;
  for (const Date& d : dates) {
    std::int64_t n = day_number(d);
    if (n < first) throw DataError("date " + format_date(d) + " precedes origin " + format_date(origin));
    last = std::max(last, n);
  }
  return TimeBinning::fixed_unit(first, last, unit);
}

// Clubs consecutive years until each step holds at least `thre` facts.
// A trailing step that never reaches the threshold is merged into the
// previous one.
inline TimeBinning bin_threshold(const std::map<std::int32_t, std::int64_t>& year_counts,
                                 std::int64_t thre) {
  if (thre < 1) throw UsageError("threshold must be >= 1");
  if (year_counts.empty()) throw UsageError("empty year count map");
  std::vector<std::int64_t> starts;
  std::int64_t acc = 0;
  bool open = false;
  std::int64_t open_start = 0;
  for (const auto& [year, count] : year_counts) {
    if (!open) {
      open = true;
      open_start = year;
    }
    acc += count;
    if (acc >= thre) {
      starts.push_back(open_start);
      open = false;
      acc = 0;
    }
  }
  if (open && starts.empty()) starts.push_back(open_start);
  return TimeBinning::threshold(std::move(starts), year_counts.rbegin()->first, thre);
}

// Manifest text: `key⭾value` header lines followed by one
// `boundary⭾index⭾start` line per step. Starts are dates for FixedUnit
// and years for Threshold.
inline void write_binning_manifest(std::ostream& out, const TimeBinning& b) {
  bool fixed = b.mode() == TimeBinning::Mode::FixedUnit;
  auto render = [&](std::int64_t v) {
    return fixed ? format_date(date_from_day_number(v)) : std::to_string(v);
  };
  out << "mode\t" << (fixed ? "fixed" : "threshold") << "\n";
  out << "parameter\t" << b.parameter() << "\n";
  out << "n_steps\t" << b.size() << "\n";
  out << "last\t" << render(b.last()) << "\n";
  for (std::int32_t i = 0; i < b.size(); ++i) {
    out << "boundary\t" << i << "\t" << render(b.boundaries()[static_cast<std::size_t>(i)]) << "\n";
  }
}

inline TimeBinning read_binning_manifest(std::istream& in) {
  std::string line, mode;
  std::int64_t parameter = 0, n_steps = -1, last = 0;
  std::vector<std::int64_t> starts;
  std::string last_text;
  auto bad = [](const std::string& why) { return DataError("binning manifest: " + why); };
  std::vector<std::string> start_texts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    std::getline(fields, key, '\t');
    std::string a, b;
    std::getline(fields, a, '\t');
    std::getline(fields, b, '\t');
    try {
      if (key == "mode") {
        mode = a;
      } else if (key == "parameter") {
        parameter = std::stoll(a);
      } else if (key == "n_steps") {
        n_steps = std::stoll(a);
      } else if (key == "last") {
        last_text = a;
      } else if (key == "boundary") {
        if (std::stoll(a) != static_cast<std::int64_t>(start_texts.size())) throw bad("boundary out of order");
        start_texts.push_back(b);
      } else {
        throw bad("unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw bad("malformed line '" + line + "'");
    }
  }
  if (mode != "fixed" && mode != "threshold") throw bad("missing or unknown mode");
  if (n_steps != static_cast<std::int64_t>(start_texts.size())) throw bad("n_steps does not match boundaries");
  bool fixed = mode == "fixed";
  auto value = [&](const std::string& text) -> std::int64_t {
    if (fixed) {
      auto d = parse_date(text);
      if (!d) throw bad("unknown date in manifest");
      return day_number(*d);
    }
    try {
      return std::stoll(text);
    } catch (const std::logic_error&) {
      throw bad("bad year '" + text + "'");
    }
  };
  for (const auto& t : start_texts) starts.push_back(value(t));
  last = value(last_text);
  if (starts.empty()) throw bad("no boundaries");
  try {
    if (fixed) {
      TimeBinning b = TimeBinning::fixed_unit(starts.front(), last, parameter);
      if (b.boundaries() != starts) throw bad("boundaries inconsistent with unit");
      return b;
    }
    return TimeBinning::threshold(std::move(starts), last, parameter);
  } catch (const UsageError& e) {
    throw bad(e.what());
  }
}

}  // namespace tero
