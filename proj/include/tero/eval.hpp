#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tero/binning.hpp"
#include "tero/data.hpp"
#include "tero/error.hpp"
#include "tero/model.hpp"

namespace tero {

enum class Side : std::uint8_t { Subject, Object };

inline const char* side_name(Side s) { return s == Side::Subject ? "subject" : "object"; }

enum class TiePolicy : std::uint8_t {
  Mean,         // 1 + lower + equal/2, rounded half up
  Optimistic,   // 1 + lower
  Pessimistic,  // 1 + lower + equal
};

// Time annotation with dates replaced by step indices; -1 marks an absent
// endpoint.
struct TimeKey {
  TimeAnnotation::Kind kind = TimeAnnotation::Kind::Point;
  std::int32_t begin = -1;
  std::int32_t end = -1;

  friend bool operator==(const TimeKey&, const TimeKey&) = default;
};

inline TimeKey time_key(const TimeAnnotation& t, const TimeBinning& binning) {
  using K = TimeAnnotation::Kind;
  switch (t.kind) {
    case K::Point: {
      auto s = binning.step(t.begin);
      return {K::Point, s, s};
    }
    case K::Interval:
      return {K::Interval, binning.step(t.begin), binning.step(t.end)};
    case K::BeginOnly:
      return {K::BeginOnly, binning.step(t.begin), -1};
    case K::EndOnly:
      return {K::EndOnly, -1, binning.step(t.end)};
  }
  return {};
}

// All known positives, keyed by (s, r, o) plus the step-normalized time.
// Lookups are indexed by the query context so that the filtered answers of
// a link-prediction query come back as one sorted list.
class FilterSet {
 public:
  FilterSet() = default;

  FilterSet(std::span<const Quadruple> facts, const TimeBinning& binning) : binning_(binning) {
    for (const auto& q : facts) {
      TimeKey t = time_key(q.time, binning_);
      answers_[Context{Side::Object, q.subject, q.relation, t}].push_back(q.object);
      answers_[Context{Side::Subject, q.object, q.relation, t}].push_back(q.subject);
    }
    for (auto& [ctx, list] : answers_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }

  const TimeBinning& binning() const { return binning_; }

  bool contains(const Quadruple& q) const {
    const auto* list = answers(q, Side::Object);
    return list != nullptr && std::binary_search(list->begin(), list->end(), q.object);
  }

  // True entities for the `side` slot of `q`'s query context, or null.
  const std::vector<std::int32_t>* answers(const Quadruple& q, Side side) const {
    TimeKey t = time_key(q.time, binning_);
    Context ctx = side == Side::Object ? Context{Side::Object, q.subject, q.relation, t}
                                       : Context{Side::Subject, q.object, q.relation, t};
    auto it = answers_.find(ctx);
    return it == answers_.end() ? nullptr : &it->second;
  }

 private:
  struct Context {
    Side side;
    std::int32_t entity;
    std::int32_t relation;
    TimeKey time;
    friend bool operator==(const Context&, const Context&) = default;
  };
  struct ContextHash {
    std::size_t operator()(const Context& c) const {
      std::uint64_t h = 1469598103934665603ull;
      auto mix = [&](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      };
      mix(static_cast<std::uint64_t>(c.side));
      mix(static_cast<std::uint32_t>(c.entity));
      mix(static_cast<std::uint32_t>(c.relation));
      mix(static_cast<std::uint64_t>(c.time.kind));
      mix(static_cast<std::uint32_t>(c.time.begin));
      mix(static_cast<std::uint32_t>(c.time.end));
      return static_cast<std::size_t>(h);
    }
  };

  TimeBinning binning_;
  std::unordered_map<Context, std::vector<std::int32_t>, ContextHash> answers_;
};

namespace detail {

struct ScoreComponent {
  RelationSlot slot;
  std::int32_t step;
  double weight;
};

template <class T>
std::vector<ScoreComponent> score_components(const BasicParams<T>& p, const TimeAnnotation& t,
                                             const TimeBinning& binning) {
  using K = TimeAnnotation::Kind;
  switch (t.kind) {
    case K::Point: {
      auto s = binning.step(t.begin);
      if (!p.dual) return {{RelationSlot::Begin, s, 1.0}};
      return {{RelationSlot::Begin, s, 0.5}, {RelationSlot::End, s, 0.5}};
    }
    case K::Interval:
      return {{RelationSlot::Begin, binning.step(t.begin), 0.5}, {RelationSlot::End, binning.step(t.end), 0.5}};
    case K::BeginOnly:
      return {{RelationSlot::Begin, binning.step(t.begin), 1.0}};
    case K::EndOnly:
      return {{RelationSlot::End, binning.step(t.end), 1.0}};
  }
  return {};
}

}  // namespace detail

// Scores every entity substituted into the `side` slot of `q`.
template <class T>
void score_candidates(const BasicParams<T>& p, const Quadruple& q, Side side, const TimeBinning& binning,
                      std::vector<double>& out) {
  p.check_ids(q.subject, q.relation, q.object, 0);
  std::size_t k = p.k();
  out.assign(static_cast<std::size_t>(p.n_entities), 0.0);
  std::vector<double> acc(static_cast<std::size_t>(p.n_entities));
  std::vector<double> fixed_re(k), fixed_im(k), cs(k), sn(k);
  for (const auto& comp : detail::score_components(p, q.time, binning)) {
    const T* th = p.phase_row(comp.step);
    const T* r = p.relation_row(q.relation, comp.slot);
    for (std::size_t j = 0; j < k; ++j) {
      cs[j] = std::cos(double(th[j]));
      sn[j] = std::sin(double(th[j]));
    }
    if (side == Side::Object) {
      const T* s = p.entity_row(q.subject);
      for (std::size_t j = 0; j < k; ++j) {
        fixed_re[j] = (s[j] * cs[j] - s[k + j] * sn[j]) + r[j];
        fixed_im[j] = (s[j] * sn[j] + s[k + j] * cs[j]) + r[k + j];
      }
    } else {
      const T* o = p.entity_row(q.object);
      for (std::size_t j = 0; j < k; ++j) {
        fixed_re[j] = r[j] - (o[j] * cs[j] - o[k + j] * sn[j]);
        fixed_im[j] = r[k + j] + (o[j] * sn[j] + o[k + j] * cs[j]);
      }
    }
    for (std::int32_t e = 0; e < p.n_entities; ++e) {
      const T* v = p.entity_row(e);
      double sum = 0.0;
      if (side == Side::Object) {
        for (std::size_t j = 0; j < k; ++j) {
          double z_re = fixed_re[j] - (v[j] * cs[j] - v[k + j] * sn[j]);
          double z_im = fixed_im[j] + (v[j] * sn[j] + v[k + j] * cs[j]);
          sum += detail::norm_term(z_re, z_im, p.norm);
        }
      } else {
        for (std::size_t j = 0; j < k; ++j) {
          double z_re = (v[j] * cs[j] - v[k + j] * sn[j]) + fixed_re[j];
          double z_im = (v[j] * sn[j] + v[k + j] * cs[j]) + fixed_im[j];
          sum += detail::norm_term(z_re, z_im, p.norm);
        }
      }
      out[static_cast<std::size_t>(e)] += comp.weight * detail::finish_norm(sum, p.norm);
    }
  }
}

// Rank of the true entity among `scores`, skipping filtered entities.
// `filtered` must be sorted; the true entity is never skipped.
inline std::int64_t rank_from_scores(std::span<const double> scores, std::int32_t truth,
                                     std::span<const std::int32_t> filtered, TiePolicy ties) {
  double target = scores[static_cast<std::size_t>(truth)];
  std::int64_t lower = 0, equal = 0;
  auto f = filtered.begin();
  for (std::int32_t e = 0; e < static_cast<std::int32_t>(scores.size()); ++e) {
    while (f != filtered.end() && *f < e) ++f;
    if (e == truth || (f != filtered.end() && *f == e)) continue;
    double v = scores[static_cast<std::size_t>(e)];
    if (v < target) {
      ++lower;
    } else if (v == target) {
      ++equal;
    }
  }
  switch (ties) {
    case TiePolicy::Optimistic:
      return 1 + lower;
    case TiePolicy::Pessimistic:
      return 1 + lower + equal;
    case TiePolicy::Mean:
      break;
  }
  return 1 + lower + (equal + 1) / 2;
}

// Time-wise filtered rank of `q` when its `side` entity is replaced by every
// entity in turn.
template <class T>
std::int64_t rank_query(const BasicParams<T>& p, const Quadruple& q, Side side, const FilterSet& filter,
                        const TimeBinning& binning, TiePolicy ties = TiePolicy::Mean) {
  if (!filter.contains(q)) throw UsageError("rank_query: test fact is not in the filter set");
  std::vector<double> scores;
  score_candidates(p, q, side, binning, scores);
  const auto* known = filter.answers(q, side);
  std::int32_t truth = side == Side::Object ? q.object : q.subject;
  return rank_from_scores(scores, truth, *known, ties);
}

struct QueryRank {
  std::size_t fact = 0;  // index into the evaluated test set
  Side side = Side::Object;
  std::int64_t rank = 1;
};

struct EvalReport {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::vector<QueryRank> ranks;
};

inline EvalReport summarize(std::vector<QueryRank> ranks) {
  EvalReport r;
  if (ranks.empty()) return r;
  for (const auto& q : ranks) {
    r.mrr += 1.0 / static_cast<double>(q.rank);
    r.hits1 += q.rank <= 1;
    r.hits3 += q.rank <= 3;
    r.hits10 += q.rank <= 10;
  }
  double n = static_cast<double>(ranks.size());
  r.mrr /= n;
  r.hits1 /= n;
  r.hits3 /= n;
  r.hits10 /= n;
  r.ranks = std::move(ranks);
  return r;
}

struct EvalOptions {
  TiePolicy ties = TiePolicy::Mean;
  int threads = 1;
};

// Subject- and object-side queries for every test fact. `binning` maps
// test dates to the model's steps; the filter carries its own binning.
template <class T>
EvalReport evaluate(const BasicParams<T>& p, std::span<const Quadruple> test, const FilterSet& filter,
                    const TimeBinning& binning, const EvalOptions& opts = {}) {
  if (test.empty()) throw UsageError("evaluate: empty test set");
  for (const auto& q : test) {
    if (!filter.contains(q)) throw UsageError("evaluate: test fact is not in the filter set");
  }
  std::vector<QueryRank> ranks(test.size() * 2);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& q = test[i];
      for (Side side : {Side::Subject, Side::Object}) {
        score_candidates(p, q, side, binning, scores);
        std::int32_t truth = side == Side::Object ? q.object : q.subject;
        auto rank = rank_from_scores(scores, truth, *filter.answers(q, side), opts.ties);
        ranks[2 * i + (side == Side::Object ? 1 : 0)] = QueryRank{i, side, rank};
      }
    }
  };
  std::size_t threads = static_cast<std::size_t>(std::max(1, opts.threads));
  threads = std::min(threads, test.size());
  if (threads == 1) {
    work(0, test.size());
  } else {
    std::vector<std::jthread> pool;
    std::size_t chunk = (test.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      std::size_t b = t * chunk, e = std::min(test.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return summarize(std::move(ranks));
}

inline void write_report(std::ostream& out, const EvalReport& r) {
  out << "metric\tvalue\n";
  out << "mrr\t" << r.mrr << "\n";
  out << "hits@1\t" << r.hits1 << "\n";
  out << "hits@3\t" << r.hits3 << "\n";
  out << "hits@10\t" << r.hits10 << "\n";
  out << "queries\t" << r.ranks.size() << "\n";
}

inline void write_rank_dump(std::ostream& out, const EvalReport& r, std::span<const Quadruple> test,
                            const Vocabulary& vocab, Format format) {
  out << "subject\trelation\tobject\ttime\tside\trank\n";
  for (const auto& q : r.ranks) {
    RawFact f = decode(test[q.fact], vocab);
    std::string line = format_fact_line(f, format == Format::PointTsv && f.time.kind != TimeAnnotation::Kind::Point
                                               ? Format::IntervalTsv
                                               : format);
    // Collapse the time columns into one field.
    auto fields = detail::split_tabs(line);
    out << fields[0] << "\t" << fields[1] << "\t" << fields[2] << "\t" << fields[3];
    if (fields.size() > 4) out << "/" << fields[4];
    out << "\t" << side_name(q.side) << "\t" << q.rank << "\n";
  }
}

}  // namespace tero
