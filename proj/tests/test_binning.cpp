#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "tero/binning.hpp"
#include "tero/data.hpp"

using namespace tero;

namespace {

std::vector<Date> every_day_of(int year) {
  std::vector<Date> out;
  for (auto n = day_number(Date{year, 1, 1}); n <= day_number(Date{year, 12, 31}); ++n) {
    out.push_back(date_from_day_number(n));
  }
  return out;
}

}  // namespace

TEST(BinFixed, DailyStepsOverOneYear) {
  auto dates = every_day_of(2014);
  auto b = bin_fixed(dates, 1, Date{2014, 1, 1});
  EXPECT_EQ(b.size(), 365);
  EXPECT_EQ(b.step(Date{2014, 1, 2}), 1);
  EXPECT_EQ(b.step(Date{2014, 12, 31}), 364);
}

TEST(BinFixed, TwoDaySteps) {
  auto dates = every_day_of(2014);
  auto b = bin_fixed(dates, 2, Date{2014, 1, 1});
  EXPECT_EQ(b.size(), 183);
  EXPECT_EQ(b.step(Date{2014, 1, 2}), 0);
  EXPECT_EQ(b.step(Date{2014, 12, 31}), 182);
}

TEST(BinFixed, OriginIsStepZero) {
  auto dates = every_day_of(2014);
  for (std::int64_t u : {1, 2, 3, 7, 14, 30, 90, 365}) {
    EXPECT_EQ(bin_fixed(dates, u, Date{2014, 1, 1}).step(Date{2014, 1, 1}), 0) << u;
  }
  EXPECT_EQ(bin_fixed(dates, 365, Date{2014, 1, 1}).size(), 1);
}

TEST(BinFixed, Errors) {
  std::vector<Date> dates{Date{2014, 1, 5}};
  EXPECT_THROW(bin_fixed(dates, 1, Date{2014, 1, 6}), DataError);
  EXPECT_THROW(bin_fixed(dates, 0, Date{2014, 1, 1}), UsageError);
  std::vector<Date> coarse{Date{2014, 0, 0}};
  EXPECT_THROW(bin_fixed(coarse, 1, Date{2014, 1, 1}), DataError);
  auto b = bin_fixed(dates, 1, Date{2014, 1, 1});
  EXPECT_THROW(b.step(Date{2013, 12, 31}), DataError);
  EXPECT_THROW(b.step(Date{2014, 1, 6}), DataError);
}

TEST(BinFixed, TranslationConsistentAndMonotone) {
  auto dates = every_day_of(2016);
  for (std::int64_t u : {1, 2, 3, 7, 30}) {
    auto b = bin_fixed(dates, u, Date{2016, 1, 1});
    for (std::size_t i = 0; i + 1 < dates.size(); ++i) {
      ASSERT_LE(b.step(dates[i]), b.step(dates[i + 1]));
      if (i + static_cast<std::size_t>(u) < dates.size()) {
        ASSERT_EQ(b.step(dates[i + static_cast<std::size_t>(u)]), b.step(dates[i]) + 1);
      }
      ASSERT_LT(b.step(dates[i]), b.size());
    }
  }
}

TEST(BinThreshold, HandExample) {
  std::map<std::int32_t, std::int64_t> counts{{1990, 1}, {1991, 1}, {1992, 5}, {1993, 1}};
  auto b = bin_threshold(counts, 2);
  EXPECT_EQ(b.size(), 2);
  EXPECT_EQ(b.step(Date{1990, 0, 0}), 0);
  EXPECT_EQ(b.step(Date{1991, 6, 1}), 0);
  EXPECT_EQ(b.step(Date{1992, 0, 0}), 1);
  EXPECT_EQ(b.step(Date{1993, 0, 0}), 1);
  EXPECT_THROW(b.step(Date{1989, 0, 0}), DataError);
  EXPECT_THROW(b.step(Date{1994, 0, 0}), DataError);
}

TEST(BinThreshold, SingleYear) {
  EXPECT_EQ(bin_threshold({{2000, 5}}, 3).size(), 1);
  EXPECT_EQ(bin_threshold({{2000, 5}}, 30).size(), 1);
}

TEST(BinThreshold, ThresholdOneGivesOneStepPerYear) {
  std::map<std::int32_t, std::int64_t> counts{{-453, 1}, {100, 2}, {2008, 40}};
  auto b = bin_threshold(counts, 1);
  EXPECT_EQ(b.size(), 3);
  EXPECT_EQ(b.step(Date{-453, 0, 0}), 0);
  EXPECT_EQ(b.step(Date{100, 0, 0}), 1);
  // Years absent from the data fall into the step that precedes them.
  EXPECT_EQ(b.step(Date{1500, 0, 0}), 1);
}

TEST(BinThreshold, Errors) {
  EXPECT_THROW(bin_threshold({}, 1), UsageError);
  EXPECT_THROW(bin_threshold({{2000, 1}}, 0), UsageError);
}

// Every step reaches the threshold whenever the total does; steps are
// ordered and cover every year.
TEST(BinThreshold, StepsReachThresholdProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::int32_t, std::int64_t> counts;
    int years = 1 + static_cast<int>(rng() % 60);
    std::int64_t total = 0;
    for (int i = 0; i < years; ++i) {
      std::int32_t y = static_cast<std::int32_t>(rng() % 3000) - 500;
      std::int64_t c = 1 + static_cast<std::int64_t>(rng() % (rng() % 4 == 0 ? 400 : 20));
      counts[y] += c;
    }
    for (const auto& [y, c] : counts) total += c;
    std::int64_t thre = 1 + static_cast<std::int64_t>(rng() % 200);
    auto b = bin_threshold(counts, thre);
    std::vector<std::int64_t> per_step(static_cast<std::size_t>(b.size()), 0);
    std::int32_t prev = 0;
    for (const auto& [y, c] : counts) {
      auto s = b.step(Date{y, 0, 0});
      ASSERT_GE(s, prev);
      prev = s;
      per_step[static_cast<std::size_t>(s)] += c;
    }
    for (auto c : per_step) {
      if (total >= thre) {
        ASSERT_GE(c, thre);
      }
      ASSERT_GT(c, 0);
    }
  }
}

TEST(Manifest, RoundTripBothModes) {
  auto fixed = bin_fixed(every_day_of(2014), 7, Date{2014, 1, 1});
  auto thre = bin_threshold({{-453, 3}, {100, 1}, {2008, 9}}, 3);
  for (const auto& b : {fixed, thre}) {
    std::stringstream ss;
    write_binning_manifest(ss, b);
    EXPECT_EQ(read_binning_manifest(ss), b);
  }
  std::stringstream bad("mode\tfixed\nparameter\t1\nn_steps\t2\nlast\t2014-01-01\nboundary\t0\t2014-01-01\n");
  EXPECT_THROW(read_binning_manifest(bad), DataError);
}

TEST(Expand, IntervalBecomesBeginAndEnd) {
  auto b = bin_threshold({{2003, 1}, {2004, 1}, {2005, 1}}, 1);
  std::vector<Quadruple> facts{{0, 0, 1, TimeAnnotation::interval(Date{2003, 0, 0}, Date{2005, 0, 0})}};
  auto out = expand_for_training(facts, b, true);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (TrainQuad{0, 0, RelationSlot::Begin, 1, 0}));
  EXPECT_EQ(out[1], (TrainQuad{0, 0, RelationSlot::End, 1, 2}));
}

TEST(Expand, HalfOpenUsesKnownEndpoint) {
  auto b = bin_threshold({{2003, 1}, {2005, 1}}, 1);
  std::vector<Quadruple> facts{{0, 0, 1, TimeAnnotation::begin_only(Date{2003, 0, 0})},
                               {1, 0, 0, TimeAnnotation::end_only(Date{2005, 0, 0})}};
  auto out = expand_for_training(facts, b, true);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (TrainQuad{0, 0, RelationSlot::Begin, 1, 0}));
  EXPECT_EQ(out[1], (TrainQuad{1, 0, RelationSlot::End, 0, 1}));
}

TEST(Expand, PointFacts) {
  auto b = bin_fixed(every_day_of(2014), 1, Date{2014, 1, 1});
  std::vector<Quadruple> facts{{2, 1, 3, TimeAnnotation::point(Date{2014, 1, 2})}};
  auto dual = expand_for_training(facts, b, true);
  ASSERT_EQ(dual.size(), 2u);
  EXPECT_EQ(dual[0].step, dual[1].step);
  EXPECT_EQ(dual[0].slot, RelationSlot::Begin);
  EXPECT_EQ(dual[1].slot, RelationSlot::End);
  auto single = expand_for_training(facts, b, false);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], (TrainQuad{2, 1, RelationSlot::Begin, 3, 1}));
}

TEST(MakeBinning, SpanComesFromAllFacts) {
  std::vector<Quadruple> facts{{0, 0, 1, TimeAnnotation::point(Date{2014, 3, 1})},
                               {0, 0, 1, TimeAnnotation::point(Date{2014, 1, 1})},
                               {0, 0, 1, TimeAnnotation::point(Date{2014, 12, 31})}};
  auto b = make_binning(facts, {TimeBinning::Mode::FixedUnit, 1});
  EXPECT_EQ(b.size(), 365);
  auto y = make_binning(facts, {TimeBinning::Mode::Threshold, 1});
  EXPECT_EQ(y.size(), 1);
  EXPECT_EQ(year_counts(facts).at(2014), 6);
}
