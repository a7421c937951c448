#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tero/binning.hpp"
#include "tero/data.hpp"
#include "tero/error.hpp"

namespace tero {

template <class T>
struct ComplexVec {
  std::vector<T> re;
  std::vector<T> im;

  ComplexVec() = default;
  explicit ComplexVec(std::size_t k) : re(k), im(k) {}
  ComplexVec(std::vector<T> r, std::vector<T> i) : re(std::move(r)), im(std::move(i)) {
    if (re.size() != im.size()) throw UsageError("complex vector parts differ in length");
  }
  std::size_t size() const { return re.size(); }
};

// Rotation angles; each induces the unit-modulus coefficient e^{i theta}.
template <class T>
struct PhaseVec {
  std::vector<T> theta;
  std::size_t size() const { return theta.size(); }
};

// Element-wise v_j * e^{i phi_j}.
template <class T>
ComplexVec<T> rotate(const ComplexVec<T>& v, const PhaseVec<T>& phi) {
  if (v.re.size() != v.im.size() || v.size() != phi.size()) {
    throw UsageError("rotate: length mismatch");
  }
  ComplexVec<T> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    T c = std::cos(phi.theta[j]), s = std::sin(phi.theta[j]);
    out.re[j] = v.re[j] * c - v.im[j] * s;
    out.im[j] = v.re[j] * s + v.im[j] * c;
  }
  return out;
}

enum class Norm : std::uint8_t { L1 = 1, L2 = 2 };

// All trainable arrays plus their Adagrad accumulators.
//
// Complex tables are row-major with each row laid out as k real parts
// followed by k imaginary parts. Without dual relations the end-slot table
// is empty and end-slot lookups alias the begin table.
template <class T>
struct BasicParams {
  std::int32_t n_entities = 0;
  std::int32_t n_relations = 0;
  std::int32_t n_steps = 0;
  std::int32_t dim = 0;
  bool dual = false;
  Norm norm = Norm::L1;

  std::vector<T> entity;
  std::vector<T> relation_begin;
  std::vector<T> relation_end;
  std::vector<T> phase;

  std::vector<T> entity_acc;
  std::vector<T> relation_begin_acc;
  std::vector<T> relation_end_acc;
  std::vector<T> phase_acc;

  std::size_t k() const { return static_cast<std::size_t>(dim); }

  const T* entity_row(std::int32_t e) const { return entity.data() + static_cast<std::size_t>(e) * 2 * k(); }
  T* entity_row(std::int32_t e) { return entity.data() + static_cast<std::size_t>(e) * 2 * k(); }

  bool end_aliased() const { return !dual; }

  const T* relation_row(std::int32_t r, RelationSlot slot) const {
    const auto& table = (slot == RelationSlot::End && dual) ? relation_end : relation_begin;
    return table.data() + static_cast<std::size_t>(r) * 2 * k();
  }
  T* relation_row(std::int32_t r, RelationSlot slot) {
    auto& table = (slot == RelationSlot::End && dual) ? relation_end : relation_begin;
    return table.data() + static_cast<std::size_t>(r) * 2 * k();
  }

  const T* phase_row(std::int32_t step) const { return phase.data() + static_cast<std::size_t>(step) * k(); }
  T* phase_row(std::int32_t step) { return phase.data() + static_cast<std::size_t>(step) * k(); }

  ComplexVec<T> entity_vec(std::int32_t e) const { return row_vec(entity_row(e)); }
  ComplexVec<T> relation_vec(std::int32_t r, RelationSlot slot) const { return row_vec(relation_row(r, slot)); }
  PhaseVec<T> phase_vec(std::int32_t step) const {
    const T* p = phase_row(step);
    return PhaseVec<T>{std::vector<T>(p, p + k())};
  }

  void check_ids(std::int32_t s, std::int32_t r, std::int32_t o, std::int32_t step) const {
    if (s < 0 || s >= n_entities || o < 0 || o >= n_entities) throw UsageError("entity id out of range");
    if (r < 0 || r >= n_relations) throw UsageError("relation id out of range");
    if (step < 0 || step >= n_steps) throw UsageError("time step out of range");
  }

  bool all_finite() const {
    for (const auto* a : {&entity, &relation_begin, &relation_end, &phase}) {
      for (T v : *a) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  template <class U>
  BasicParams<U> cast() const {
    BasicParams<U> out;
    out.n_entities = n_entities;
    out.n_relations = n_relations;
    out.n_steps = n_steps;
    out.dim = dim;
    out.dual = dual;
    out.norm = norm;
    auto conv = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
    out.entity = conv(entity);
    out.relation_begin = conv(relation_begin);
    out.relation_end = conv(relation_end);
    out.phase = conv(phase);
    out.entity_acc = conv(entity_acc);
    out.relation_begin_acc = conv(relation_begin_acc);
    out.relation_end_acc = conv(relation_end_acc);
    out.phase_acc = conv(phase_acc);
    return out;
  }

  friend bool operator==(const BasicParams&, const BasicParams&) = default;

 private:
  ComplexVec<T> row_vec(const T* row) const {
    return ComplexVec<T>(std::vector<T>(row, row + k()), std::vector<T>(row + k(), row + 2 * k()));
  }
};

using ModelParams = BasicParams<float>;

template <class T = float>
BasicParams<T> init_params(std::int32_t n_entities, std::int32_t n_relations, std::int32_t n_steps,
                           std::int32_t dim, bool dual, std::uint64_t seed, Norm norm = Norm::L1) {
  if (n_entities < 1 || n_relations < 1 || n_steps < 1 || dim < 1) {
    throw UsageError("init_params: all sizes must be >= 1");
  }
  BasicParams<T> p;
  p.n_entities = n_entities;
  p.n_relations = n_relations;
  p.n_steps = n_steps;
  p.dim = dim;
  p.dual = dual;
  p.norm = norm;
  std::mt19937_64 rng(seed);
  double bound = 6.0 / std::sqrt(2.0 * dim);
  std::uniform_real_distribution<double> emb(-bound, bound);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  auto fill = [&](std::vector<T>& v, std::size_t n, auto& dist) {
    v.resize(n);
    for (auto& x : v) x = static_cast<T>(dist(rng));
  };
  std::size_t k = static_cast<std::size_t>(dim);
  fill(p.entity, static_cast<std::size_t>(n_entities) * 2 * k, emb);
  fill(p.relation_begin, static_cast<std::size_t>(n_relations) * 2 * k, emb);
  if (dual) fill(p.relation_end, static_cast<std::size_t>(n_relations) * 2 * k, emb);
  fill(p.phase, static_cast<std::size_t>(n_steps) * k, angle);
  p.entity_acc.assign(p.entity.size(), T(0));
  p.relation_begin_acc.assign(p.relation_begin.size(), T(0));
  p.relation_end_acc.assign(p.relation_end.size(), T(0));
  p.phase_acc.assign(p.phase.size(), T(0));
  return p;
}

// Number of trainable scalars, accumulators excluded.
template <class T>
std::int64_t param_count(const BasicParams<T>& p) {
  std::int64_t k = p.dim;
  return 2 * std::int64_t{p.n_entities} * k + 2 * (p.dual ? 2 : 1) * std::int64_t{p.n_relations} * k +
         std::int64_t{p.n_steps} * k;
}

namespace detail {

// Residual z = s_t + r - conj(o_t) for one coordinate.
template <class T>
inline void residual(const T* s, const T* r, const T* o, double c, double sn, std::size_t k, std::size_t j,
                     double& z_re, double& z_im) {
  double st_re = s[j] * c - s[k + j] * sn;
  double st_im = s[j] * sn + s[k + j] * c;
  double ot_re = o[j] * c - o[k + j] * sn;
  double ot_im = o[j] * sn + o[k + j] * c;
  z_re = st_re + r[j] - ot_re;
  z_im = st_im + r[k + j] + ot_im;
}

inline double finish_norm(double acc, Norm norm) { return norm == Norm::L2 ? std::sqrt(acc) : acc; }

inline double norm_term(double z_re, double z_im, Norm norm) {
  return norm == Norm::L2 ? z_re * z_re + z_im * z_im : std::abs(z_re) + std::abs(z_im);
}

}  // namespace detail

// Distance ||s_t + r - conj(o_t)||, lower is more plausible. L1 sums the
// absolute values of all 2k real components; L2 is the Euclidean norm.
template <class T>
double score_point(const BasicParams<T>& p, std::int32_t s, std::int32_t r, RelationSlot slot, std::int32_t o,
                   std::int32_t step) {
  p.check_ids(s, r, o, step);
  const T* sv = p.entity_row(s);
  const T* ov = p.entity_row(o);
  const T* rv = p.relation_row(r, slot);
  const T* th = p.phase_row(step);
  std::size_t k = p.k();
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double z_re, z_im;
    detail::residual(sv, rv, ov, std::cos(double(th[j])), std::sin(double(th[j])), k, j, z_re, z_im);
    acc += detail::norm_term(z_re, z_im, p.norm);
  }
  return detail::finish_norm(acc, p.norm);
}

template <class T>
double score_point(const BasicParams<T>& p, const TrainQuad& q) {
  return score_point(p, q.subject, q.relation, q.slot, q.object, q.step);
}

// Fact-level score: intervals average their begin and end quadruples, a
// point averages both slots at its single step, and a half-open fact takes
// the score of its known endpoint.
template <class T>
double score_fact(const BasicParams<T>& p, const Quadruple& q, const TimeBinning& binning) {
  using K = TimeAnnotation::Kind;
  switch (q.time.kind) {
    case K::Point: {
      auto step = binning.step(q.time.begin);
      double b = score_point(p, q.subject, q.relation, RelationSlot::Begin, q.object, step);
      if (!p.dual) return b;
      return 0.5 * (b + score_point(p, q.subject, q.relation, RelationSlot::End, q.object, step));
    }
    case K::Interval:
      return 0.5 * (score_point(p, q.subject, q.relation, RelationSlot::Begin, q.object, binning.step(q.time.begin)) +
                    score_point(p, q.subject, q.relation, RelationSlot::End, q.object, binning.step(q.time.end)));
    case K::BeginOnly:
      return score_point(p, q.subject, q.relation, RelationSlot::Begin, q.object, binning.step(q.time.begin));
    case K::EndOnly:
      return score_point(p, q.subject, q.relation, RelationSlot::End, q.object, binning.step(q.time.end));
  }
  return 0.0;
}

}  // namespace tero
