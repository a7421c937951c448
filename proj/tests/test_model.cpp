#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tero/model.hpp"

using namespace tero;

namespace {

ComplexVec<double> random_vec(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(-3, 3);
  ComplexVec<double> v(k);
  for (std::size_t j = 0; j < k; ++j) {
    v.re[j] = u(rng);
    v.im[j] = u(rng);
  }
  return v;
}

PhaseVec<double> random_phase(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(-10, 10);
  PhaseVec<double> p;
  for (std::size_t j = 0; j < k; ++j) p.theta.push_back(u(rng));
  return p;
}

// k=1 parameter set with one entity table entry per argument.
BasicParams<double> scalar_params(std::vector<std::complex<double>> entities, std::vector<std::complex<double>> rels,
                                  std::vector<double> phases, Norm norm = Norm::L1) {
  auto p = init_params<double>(static_cast<std::int32_t>(entities.size()), static_cast<std::int32_t>(rels.size()),
                               static_cast<std::int32_t>(phases.size()), 1, false, 0, norm);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    p.entity[2 * i] = entities[i].real();
    p.entity[2 * i + 1] = entities[i].imag();
  }
  for (std::size_t i = 0; i < rels.size(); ++i) {
    p.relation_begin[2 * i] = rels[i].real();
    p.relation_begin[2 * i + 1] = rels[i].imag();
  }
  p.phase = phases;
  return p;
}

}  // namespace

TEST(Rotate, ZeroPhaseIsIdentity) {
  std::mt19937_64 rng(1);
  auto v = random_vec(rng, 8);
  auto out = rotate(v, PhaseVec<double>{std::vector<double>(8, 0.0)});
  EXPECT_EQ(out.re, v.re);
  EXPECT_EQ(out.im, v.im);
}

TEST(Rotate, QuarterTurn) {
  ComplexVec<double> v({1.0}, {0.0});
  auto out = rotate(v, PhaseVec<double>{{std::numbers::pi / 2}});
  EXPECT_NEAR(out.re[0], 0.0, 1e-15);
  EXPECT_NEAR(out.im[0], 1.0, 1e-15);
}

TEST(Rotate, LengthMismatch) {
  ComplexVec<double> v(3);
  EXPECT_THROW(rotate(v, PhaseVec<double>{{0.0, 0.0}}), UsageError);
  EXPECT_THROW(ComplexVec<double>({1.0, 2.0}, {1.0}), UsageError);
}

TEST(Rotate, MatchesComplexMultiplicationAndPreservesModulus) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = random_vec(rng, 16);
    auto phi = random_phase(rng, 16);
    auto out = rotate(v, phi);
    for (std::size_t j = 0; j < 16; ++j) {
      std::complex<double> expect = std::complex<double>(v.re[j], v.im[j]) * std::polar(1.0, phi.theta[j]);
      ASSERT_NEAR(out.re[j], expect.real(), 1e-12);
      ASSERT_NEAR(out.im[j], expect.imag(), 1e-12);
      ASSERT_NEAR(std::hypot(out.re[j], out.im[j]), std::hypot(v.re[j], v.im[j]), 1e-12);
    }
  }
}

TEST(Rotate, ComposesAdditively) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = random_vec(rng, 16);
    auto a = random_phase(rng, 16), b = random_phase(rng, 16);
    PhaseVec<double> sum;
    for (std::size_t j = 0; j < 16; ++j) sum.theta.push_back(a.theta[j] + b.theta[j]);
    auto twice = rotate(rotate(v, a), b);
    auto once = rotate(v, sum);
    for (std::size_t j = 0; j < 16; ++j) {
      ASSERT_NEAR(twice.re[j], once.re[j], 1e-10);
      ASSERT_NEAR(twice.im[j], once.im[j], 1e-10);
    }
  }
}

TEST(ScorePoint, ExactTranslationScoresZero) {
  // s = 1, r = 0, o = 1, theta = 0: ||1 - conj(1)|| = 0.
  auto p = scalar_params({{1, 0}}, {{0, 0}}, {0.0});
  EXPECT_EQ(score_point(p, 0, 0, RelationSlot::Begin, 0, 0), 0.0);
}

TEST(ScorePoint, ConstructedObjectScoresZero) {
  std::mt19937_64 rng(4);
  for (Norm norm : {Norm::L1, Norm::L2}) {
    auto p = init_params<double>(2, 1, 1, 6, false, 9, norm);
    // conj(o_t) = s_t + r  =>  o = conj(s_t + r) * e^{i theta}.
    for (std::size_t j = 0; j < 6; ++j) {
      std::complex<double> tau = std::polar(1.0, p.phase[j]);
      std::complex<double> st = std::complex<double>(p.entity[j], p.entity[6 + j]) * tau;
      std::complex<double> r(p.relation_begin[j], p.relation_begin[6 + j]);
      std::complex<double> o = std::conj(st + r) * std::conj(tau);
      p.entity[12 + j] = o.real();
      p.entity[12 + 6 + j] = o.imag();
    }
    EXPECT_NEAR(score_point(p, 0, 0, RelationSlot::Begin, 1, 0), 0.0, 1e-12);
  }
}

TEST(ScorePoint, MatchesIndependentOracle) {
  std::mt19937_64 rng(5);
  for (Norm norm : {Norm::L1, Norm::L2}) {
    for (bool dual : {false, true}) {
      auto p = init_params<double>(3, 2, 4, 2, dual, rng(), norm);
      for (std::int32_t s = 0; s < 3; ++s) {
        for (std::int32_t o = 0; o < 3; ++o) {
          for (std::int32_t t = 0; t < 4; ++t) {
            for (auto slot : {RelationSlot::Begin, RelationSlot::End}) {
              EXPECT_NEAR(score_point(p, s, 1, slot, o, t), oracle::score(p, s, 1, slot, o, t), 1e-10);
            }
          }
        }
      }
    }
  }
}

TEST(ScorePoint, NonNegativeAndIdChecks) {
  auto p = init_params<double>(5, 2, 3, 4, true, 1);
  for (std::int32_t s = 0; s < 5; ++s) {
    for (std::int32_t o = 0; o < 5; ++o) EXPECT_GT(score_point(p, s, 0, RelationSlot::End, o, 2), 0.0);
  }
  EXPECT_THROW(score_point(p, 5, 0, RelationSlot::Begin, 0, 0), UsageError);
  EXPECT_THROW(score_point(p, 0, 2, RelationSlot::Begin, 0, 0), UsageError);
  EXPECT_THROW(score_point(p, 0, 0, RelationSlot::Begin, -1, 0), UsageError);
  EXPECT_THROW(score_point(p, 0, 0, RelationSlot::Begin, 0, 3), UsageError);
}

TEST(ScorePoint, AsymmetricRelationIsRepresentable) {
  // s = 1, r = 1, o = 2: s + r = conj(o) but o + r - conj(s) = 2.
  auto p = scalar_params({{1, 0}, {2, 0}}, {{1, 0}}, {0.0});
  EXPECT_EQ(score_point(p, 0, 0, RelationSlot::Begin, 1, 0), 0.0);
  EXPECT_NEAR(score_point(p, 1, 0, RelationSlot::Begin, 0, 0), 2.0, 1e-15);
}

TEST(ScorePoint, TemporaryRelationIsRepresentable) {
  // Exact at theta = 0, off at theta = pi/2.
  std::complex<double> s(1, 0.5), r(0.25, 1);
  auto p = scalar_params({s, std::conj(s + r)}, {r}, {0.0, std::numbers::pi / 2});
  EXPECT_NEAR(score_point(p, 0, 0, RelationSlot::Begin, 1, 0), 0.0, 1e-15);
  EXPECT_GT(score_point(p, 0, 0, RelationSlot::Begin, 1, 1), 1.0);
}

TEST(ScorePoint, DistinctReflexiveRelations) {
  // r = -2i Im(s_t) makes (s, r, s) exact; two entities give two relations.
  std::complex<double> s1(1, 1), s2(1, 2);
  auto p = scalar_params({s1, s2}, {{0, -2}, {0, -4}}, {0.0});
  EXPECT_EQ(score_point(p, 0, 0, RelationSlot::Begin, 0, 0), 0.0);
  EXPECT_EQ(score_point(p, 1, 1, RelationSlot::Begin, 1, 0), 0.0);
  EXPECT_GT(score_point(p, 0, 1, RelationSlot::Begin, 0, 0), 1.0);
}

TEST(ScoreFact, PointIntervalAndHalfOpen) {
  auto b = TimeBinning::threshold({2003, 2004, 2005}, 2005, 1);
  auto p = init_params<double>(3, 1, 3, 4, true, 17);
  Date y3{2003, 0, 0}, y5{2005, 0, 0};

  Quadruple begin_only{0, 0, 1, TimeAnnotation::begin_only(y3)};
  EXPECT_EQ(score_fact(p, begin_only, b), score_point(p, 0, 0, RelationSlot::Begin, 1, 0));
  Quadruple end_only{0, 0, 1, TimeAnnotation::end_only(y5)};
  EXPECT_EQ(score_fact(p, end_only, b), score_point(p, 0, 0, RelationSlot::End, 1, 2));

  Quadruple interval{0, 0, 1, TimeAnnotation::interval(y3, y5)};
  double expect = 0.5 * (oracle::score(p, 0, 0, RelationSlot::Begin, 1, 0) + oracle::score(p, 0, 0, RelationSlot::End, 1, 2));
  EXPECT_NEAR(score_fact(p, interval, b), expect, 1e-10);

  Quadruple point{0, 0, 1, TimeAnnotation::point(Date{2004, 0, 0})};
  EXPECT_NEAR(score_fact(p, point, b),
              0.5 * (oracle::score(p, 0, 0, RelationSlot::Begin, 1, 1) + oracle::score(p, 0, 0, RelationSlot::End, 1, 1)),
              1e-10);
}

TEST(ScoreFact, IntervalOfEqualScoresIsThatScore) {
  auto b = TimeBinning::threshold({2003}, 2005, 1);
  auto p = init_params<double>(2, 1, 1, 4, true, 3);
  p.relation_end = p.relation_begin;
  Quadruple q{0, 0, 1, TimeAnnotation::interval(Date{2003, 0, 0}, Date{2005, 0, 0})};
  EXPECT_DOUBLE_EQ(score_fact(p, q, b), score_point(p, 0, 0, RelationSlot::Begin, 1, 0));
}

TEST(InitParams, DeterministicAndShaped) {
  auto a = init_params(3, 2, 4, 5, true, 99);
  auto b = init_params(3, 2, 4, 5, true, 99);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, init_params(3, 2, 4, 5, true, 100));

  auto tiny = init_params(1, 1, 1, 1, false, 0);
  EXPECT_EQ(tiny.entity.size(), 2u);
  EXPECT_EQ(tiny.relation_begin.size(), 2u);
  EXPECT_TRUE(tiny.relation_end.empty());
  EXPECT_EQ(tiny.phase.size(), 1u);
  EXPECT_EQ(tiny.entity_acc, std::vector<float>(2, 0.f));
  EXPECT_THROW(init_params(0, 1, 1, 1, false, 0), UsageError);
}

TEST(InitParams, RangesAndPhaseMean) {
  auto p = init_params<double>(10, 3, 1000, 100, true, 5);
  double bound = 6.0 / std::sqrt(200.0);
  for (double v : p.entity) ASSERT_LE(std::abs(v), bound);
  for (double v : p.relation_end) ASSERT_LE(std::abs(v), bound);
  double sum = 0.0;
  for (double v : p.phase) {
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 2 * std::numbers::pi);
    sum += v;
  }
  ASSERT_EQ(p.phase.size(), 100000u);
  EXPECT_NEAR(sum / 1e5, std::numbers::pi, 0.05);
}

TEST(ParamCount, Formula) {
  EXPECT_EQ(param_count(init_params(1, 1, 1, 1, false, 0)), 5);
  EXPECT_EQ(param_count(init_params(1, 1, 1, 1, true, 0)), 7);
  BasicParams<float> icews;
  icews.n_entities = 6869;
  icews.n_relations = 230;
  icews.n_steps = 365;
  icews.dim = 500;
  EXPECT_EQ(param_count(icews), 7281500);
}
