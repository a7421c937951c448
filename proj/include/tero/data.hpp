#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tero/binning.hpp"
#include "tero/date.hpp"
#include "tero/error.hpp"

namespace tero {

enum class Format {
  PointTsv,     // s⭾r⭾o⭾date
  IntervalTsv,  // s⭾r⭾o⭾begin⭾end
};

inline Format parse_format(std::string_view name) {
  if (name == "point" || name == "point-tsv") return Format::PointTsv;
  if (name == "interval" || name == "interval-tsv") return Format::IntervalTsv;
  throw UsageError("unknown dataset format '" + std::string(name) + "'");
}

inline const char* format_name(Format f) { return f == Format::PointTsv ? "point-tsv" : "interval-tsv"; }

struct TimeAnnotation {
  enum class Kind : std::uint8_t { Point, Interval, BeginOnly, EndOnly };

  Kind kind = Kind::Point;
  // For Point both hold the date; for EndOnly only `end` is meaningful and
  // for BeginOnly only `begin`.
  Date begin;
  Date end;

  static TimeAnnotation point(Date d) { return {Kind::Point, d, d}; }
  static TimeAnnotation begin_only(Date d) { return {Kind::BeginOnly, d, Date{}}; }
  static TimeAnnotation end_only(Date d) { return {Kind::EndOnly, Date{}, d}; }
  static TimeAnnotation interval(Date b, Date e) {
    if (e < b) throw DataError("interval ends before it begins: " + format_date(b) + " > " + format_date(e));
    if (b == e) return point(b);
    return {Kind::Interval, b, e};
  }

  bool has_begin() const { return kind != Kind::EndOnly; }
  bool has_end() const { return kind != Kind::BeginOnly; }

  friend bool operator==(const TimeAnnotation&, const TimeAnnotation&) = default;
};

// A fact as it appears in a dataset file, before id assignment.
struct RawFact {
  std::string subject;
  std::string relation;
  std::string object;
  TimeAnnotation time;

  friend bool operator==(const RawFact&, const RawFact&) = default;
};

struct Quadruple {
  std::int32_t subject = 0;
  std::int32_t relation = 0;
  std::int32_t object = 0;
  TimeAnnotation time;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

// Dense string <-> id table; ids are assigned in insertion order.
class Vocab {
 public:
  std::int32_t add(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<std::int32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::int32_t> find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct Vocabulary {
  Vocab entities;
  Vocab relations;

  void add(const RawFact& f) {
    entities.add(f.subject);
    relations.add(f.relation);
    entities.add(f.object);
  }
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    auto tab = line.find('\t');
    out.push_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return out;
}

}  // namespace detail

// Parses one dataset line. Throws DataError without location info.
inline RawFact parse_fact_line(std::string_view line, Format format) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto fields = detail::split_tabs(line);
  std::size_t expected = format == Format::PointTsv ? 4 : 5;
  if (fields.size() != expected) {
    throw DataError("expected " + std::to_string(expected) + " tab-separated fields, got " +
                    std::to_string(fields.size()));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (fields[i].empty()) throw DataError("empty entity or relation field");
  }
  RawFact f{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), {}};
  if (format == Format::PointTsv) {
    auto d = parse_date(fields[3]);
    if (!d) throw DataError("fact has no time information");
    f.time = TimeAnnotation::point(*d);
    return f;
  }
  auto b = parse_date(fields[3]);
  auto e = parse_date(fields[4]);
  if (!b && !e) throw DataError("fact has no time information");
  if (!b) {
    f.time = TimeAnnotation::end_only(*e);
  } else if (!e) {
    f.time = TimeAnnotation::begin_only(*b);
  } else {
    f.time = TimeAnnotation::interval(*b, *e);
  }
  return f;
}

// Inverse of parse_fact_line for canonical lines.
inline std::string format_fact_line(const RawFact& f, Format format) {
  std::string out = f.subject + "\t" + f.relation + "\t" + f.object + "\t";
  using K = TimeAnnotation::Kind;
  if (format == Format::PointTsv) {
    if (f.time.kind != K::Point) throw UsageError("point-tsv can only hold point facts");
    return out + format_date(f.time.begin);
  }
  switch (f.time.kind) {
    case K::Point:
    case K::Interval:
      return out + format_date(f.time.begin) + "\t" + format_date(f.time.end);
    case K::BeginOnly:
      return out + format_date(f.time.begin) + "\t" + format_unknown_date();
    case K::EndOnly:
      return out + format_unknown_date() + "\t" + format_date(f.time.end);
  }
  return out;
}

// Reads every non-blank line of a dataset file.
inline std::vector<RawFact> read_facts(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<RawFact> facts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      facts.push_back(parse_fact_line(line, format));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return facts;
}

inline Quadruple encode(const RawFact& f, const Vocabulary& vocab) {
  auto s = vocab.entities.find(f.subject);
  auto r = vocab.relations.find(f.relation);
  auto o = vocab.entities.find(f.object);
  if (!s) throw DataError("unknown entity '" + f.subject + "'");
  if (!r) throw DataError("unknown relation '" + f.relation + "'");
  if (!o) throw DataError("unknown entity '" + f.object + "'");
  return Quadruple{*s, *r, *o, f.time};
}

inline std::vector<Quadruple> encode(std::span<const RawFact> facts, const Vocabulary& vocab) {
  std::vector<Quadruple> out;
  out.reserve(facts.size());
  for (const auto& f : facts) out.push_back(encode(f, vocab));
  return out;
}

inline RawFact decode(const Quadruple& q, const Vocabulary& vocab) {
  return RawFact{vocab.entities.name(q.subject), vocab.relations.name(q.relation),
                 vocab.entities.name(q.object), q.time};
}

struct ParsedDataset {
  Vocabulary vocab;
  std::vector<Quadruple> facts;
};

// Single-file parse: vocab covers just this file.
inline ParsedDataset parse_dataset(const std::string& path, Format format) {
  ParsedDataset out;
  auto raw = read_facts(path, format);
  for (const auto& f : raw) out.vocab.add(f);
  out.facts = encode(raw, out.vocab);
  return out;
}

// Train/valid/test splits sharing one vocabulary built over their union.
struct Dataset {
  Format format = Format::PointTsv;
  Vocabulary vocab;
  std::vector<Quadruple> train;
  std::vector<Quadruple> valid;
  std::vector<Quadruple> test;

  std::vector<Quadruple> all() const {
    std::vector<Quadruple> out(train);
    out.insert(out.end(), valid.begin(), valid.end());
    out.insert(out.end(), test.begin(), test.end());
    return out;
  }
};

// Empty paths denote absent splits. The training split must be nonempty.
inline Dataset load_dataset(const std::string& train_path, const std::string& valid_path,
                            const std::string& test_path, Format format) {
  Dataset ds;
  ds.format = format;
  auto load = [&](const std::string& p) { return p.empty() ? std::vector<RawFact>{} : read_facts(p, format); };
  auto train = load(train_path);
  auto valid = load(valid_path);
  auto test = load(test_path);
  if (train.empty()) throw DataError("training split " + train_path + " contains no facts");
  for (const auto* split : {&train, &valid, &test}) {
    for (const auto& f : *split) ds.vocab.add(f);
  }
  ds.train = encode(train, ds.vocab);
  ds.valid = encode(valid, ds.vocab);
  ds.test = encode(test, ds.vocab);
  return ds;
}

// Vocab sidecar: one `id⭾string` line per entry.
inline void write_vocab(std::ostream& out, const Vocab& v) {
  for (std::int32_t i = 0; i < v.size(); ++i) out << i << "\t" << v.name(i) << "\n";
}

inline Vocab read_vocab(std::istream& in) {
  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("vocab line without tab: '" + line + "'");
    std::int32_t id = -1;
    auto idtext = std::string_view(line).substr(0, tab);
    if (!detail::parse_digits(idtext, id) || id != v.size()) {
      throw DataError("vocab ids must be contiguous from 0");
    }
    if (v.add(std::string_view(line).substr(tab + 1)) != id) throw DataError("duplicate vocab entry");
  }
  return v;
}

// ---- training expansion ----

enum class RelationSlot : std::uint8_t { Begin, End };

struct TrainQuad {
  std::int32_t subject = 0;
  std::int32_t relation = 0;
  RelationSlot slot = RelationSlot::Begin;
  std::int32_t object = 0;
  std::int32_t step = 0;

  friend bool operator==(const TrainQuad&, const TrainQuad&) = default;
};

// Splits each fact into per-endpoint quadruples. Without dual relations
// every quadruple uses the begin slot; points become a single quadruple.
inline std::vector<TrainQuad> expand_for_training(std::span<const Quadruple> facts, const TimeBinning& binning,
                                                  bool dual) {
  using K = TimeAnnotation::Kind;
  std::vector<TrainQuad> out;
  out.reserve(facts.size() * (dual ? 2 : 1));
  auto end_slot = dual ? RelationSlot::End : RelationSlot::Begin;
  for (const auto& q : facts) {
    switch (q.time.kind) {
      case K::Point: {
        auto step = binning.step(q.time.begin);
        out.push_back({q.subject, q.relation, RelationSlot::Begin, q.object, step});
        if (dual) out.push_back({q.subject, q.relation, RelationSlot::End, q.object, step});
        break;
      }
      case K::Interval:
        out.push_back({q.subject, q.relation, RelationSlot::Begin, q.object, binning.step(q.time.begin)});
        out.push_back({q.subject, q.relation, end_slot, q.object, binning.step(q.time.end)});
        break;
      case K::BeginOnly:
        out.push_back({q.subject, q.relation, RelationSlot::Begin, q.object, binning.step(q.time.begin)});
        break;
      case K::EndOnly:
        out.push_back({q.subject, q.relation, end_slot, q.object, binning.step(q.time.end)});
        break;
    }
  }
  return out;
}

// Year histogram of time mentions; a point counts for both of its
// (coinciding) endpoints, matching how interval files spell points.
inline std::map<std::int32_t, std::int64_t> year_counts(std::span<const Quadruple> facts) {
  std::map<std::int32_t, std::int64_t> counts;
  for (const auto& q : facts) {
    if (q.time.has_begin()) ++counts[q.time.begin.year];
    if (q.time.has_end()) ++counts[q.time.end.year];
  }
  return counts;
}

inline std::vector<Date> known_dates(std::span<const Quadruple> facts) {
  std::vector<Date> out;
  for (const auto& q : facts) {
    if (q.time.has_begin()) out.push_back(q.time.begin);
    if (q.time.has_end() && q.time.kind != TimeAnnotation::Kind::Point) out.push_back(q.time.end);
  }
  return out;
}

struct Granularity {
  TimeBinning::Mode mode = TimeBinning::Mode::FixedUnit;
  std::int64_t value = 1;  // days or fact count
};

// Builds the binning over the full time span of `facts` (all splits).
inline TimeBinning make_binning(std::span<const Quadruple> facts, const Granularity& g) {
  if (facts.empty()) throw DataError("cannot bin an empty dataset");
  if (g.mode == TimeBinning::Mode::Threshold) return bin_threshold(year_counts(facts), g.value);
  auto dates = known_dates(facts);
  Date origin = *std::min_element(dates.begin(), dates.end(), [](const Date& a, const Date& b) {
    return day_number(a) < day_number(b);
  });
  return bin_fixed(dates, g.value, origin);
}

}  // namespace tero
