#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "tero/data.hpp"
#include "tero/error.hpp"
#include "tero/eval.hpp"
#include "tero/model.hpp"

namespace tero {

struct TrainConfig {
  std::int32_t dim = 500;
  std::int32_t batch_size = 512;
  std::int32_t neg_ratio = 10;
  double margin = 20.0;
  double lr = 0.1;
  std::int32_t max_epochs = 5000;
  std::int32_t valid_every = 100;
  std::int32_t patience = 5;
  Norm norm = Norm::L1;
  std::uint64_t seed = 42;
  int threads = 1;
  TiePolicy ties = TiePolicy::Mean;

  void validate() const {
    if (dim < 1) throw UsageError("dim must be >= 1");
    if (batch_size < 1) throw UsageError("batch size must be >= 1");
    if (neg_ratio < 1) throw UsageError("negative ratio must be >= 1");
    if (!(margin > 0)) throw UsageError("margin must be > 0");
    if (!(lr > 0)) throw UsageError("learning rate must be > 0");
    if (max_epochs < 0) throw UsageError("max epochs must be >= 0");
    if (valid_every < 1) throw UsageError("validation interval must be >= 1");
    if (patience < 1) throw UsageError("patience must be >= 1");
  }
};

inline constexpr double kAdagradEpsilon = 1e-10;

// Corrupts the subject or the object (fair coin) of `q`, drawing the
// replacement uniformly among the other n_entities - 1 entities.
template <class Rng>
std::vector<TrainQuad> sample_negatives(const TrainQuad& q, std::int32_t ratio, std::int32_t n_entities, Rng& rng) {
  if (n_entities < 2) throw UsageError("negative sampling needs at least two entities");
  std::vector<TrainQuad> out;
  out.reserve(static_cast<std::size_t>(std::max(ratio, 0)));
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::int32_t> pick(0, n_entities - 2);
  for (std::int32_t i = 0; i < ratio; ++i) {
    TrainQuad neg = q;
    std::int32_t& slot = coin(rng) ? neg.subject : neg.object;
    std::int32_t e = pick(rng);
    if (e >= slot) ++e;
    slot = e;
    out.push_back(neg);
  }
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// -log sigmoid(x), stable for large |x|.
inline double neg_log_sigmoid(double x) { return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Negative-sampling loss of one positive against its negatives, each
// negative weighted 1/|negatives|.
inline double loss(double pos_score, std::span<const double> neg_scores, double margin) {
  double l = neg_log_sigmoid(margin - pos_score);
  if (neg_scores.empty()) return l;
  double w = 1.0 / static_cast<double>(neg_scores.size());
  for (double n : neg_scores) l += w * neg_log_sigmoid(n - margin);
  return l;
}

// Positives with `ratio` negatives each; negatives[i * ratio + j] belongs to
// positives[i].
struct Batch {
  std::vector<TrainQuad> positives;
  std::vector<TrainQuad> negatives;
  std::int32_t ratio = 1;
};

// Dense gradient buffers with a record of touched rows, so resets and
// updates only visit rows that appeared in the batch.
template <class T>
class Gradients {
 public:
  explicit Gradients(const BasicParams<T>& p) {
    entity_.resize(p.entity.size());
    rel_begin_.resize(p.relation_begin.size());
    rel_end_.resize(p.relation_end.size());
    phase_.resize(p.phase.size());
    mark_entity_.assign(static_cast<std::size_t>(p.n_entities), 0);
    mark_rel_begin_.assign(static_cast<std::size_t>(p.n_relations), 0);
    mark_rel_end_.assign(p.dual ? static_cast<std::size_t>(p.n_relations) : 0, 0);
    mark_phase_.assign(static_cast<std::size_t>(p.n_steps), 0);
    k_ = p.k();
  }

  void clear() {
    auto wipe = [&](std::vector<double>& buf, std::vector<char>& mark, std::vector<std::int32_t>& rows,
                    std::size_t width) {
      for (auto r : rows) {
        std::fill_n(buf.begin() + static_cast<std::ptrdiff_t>(r * width), width, 0.0);
        mark[static_cast<std::size_t>(r)] = 0;
      }
      rows.clear();
    };
    wipe(entity_, mark_entity_, rows_entity_, 2 * k_);
    wipe(rel_begin_, mark_rel_begin_, rows_rel_begin_, 2 * k_);
    wipe(rel_end_, mark_rel_end_, rows_rel_end_, 2 * k_);
    wipe(phase_, mark_phase_, rows_phase_, k_);
  }

  double* entity(std::int32_t e) { return touch(entity_, mark_entity_, rows_entity_, e, 2 * k_); }
  double* relation(std::int32_t r, RelationSlot slot, bool dual) {
    if (slot == RelationSlot::End && dual) return touch(rel_end_, mark_rel_end_, rows_rel_end_, r, 2 * k_);
    return touch(rel_begin_, mark_rel_begin_, rows_rel_begin_, r, 2 * k_);
  }
  double* phase(std::int32_t step) { return touch(phase_, mark_phase_, rows_phase_, step, k_); }

  const std::vector<double>& entity_buffer() const { return entity_; }
  const std::vector<double>& relation_begin_buffer() const { return rel_begin_; }
  const std::vector<double>& relation_end_buffer() const { return rel_end_; }
  const std::vector<double>& phase_buffer() const { return phase_; }

  const std::vector<std::int32_t>& touched_entities() const { return rows_entity_; }
  const std::vector<std::int32_t>& touched_relations_begin() const { return rows_rel_begin_; }
  const std::vector<std::int32_t>& touched_relations_end() const { return rows_rel_end_; }
  const std::vector<std::int32_t>& touched_steps() const { return rows_phase_; }

 private:
  static double* touch(std::vector<double>& buf, std::vector<char>& mark, std::vector<std::int32_t>& rows,
                       std::int32_t r, std::size_t width) {
    if (!mark[static_cast<std::size_t>(r)]) {
      mark[static_cast<std::size_t>(r)] = 1;
      rows.push_back(r);
    }
    return buf.data() + static_cast<std::size_t>(r) * width;
  }

  std::size_t k_ = 0;
  std::vector<double> entity_, rel_begin_, rel_end_, phase_;
  std::vector<char> mark_entity_, mark_rel_begin_, mark_rel_end_, mark_phase_;
  std::vector<std::int32_t> rows_entity_, rows_rel_begin_, rows_rel_end_, rows_phase_;
};

// Adds weight * d score_point(q) / d params into `g`.
template <class T>
void accumulate_score_gradient(const BasicParams<T>& p, const TrainQuad& q, double weight, Gradients<T>& g) {
  std::size_t k = p.k();
  const T* s = p.entity_row(q.subject);
  const T* o = p.entity_row(q.object);
  const T* r = p.relation_row(q.relation, q.slot);
  const T* th = p.phase_row(q.step);

  std::vector<double> z_re(k), z_im(k), st_re(k), st_im(k), ot_re(k), ot_im(k), cs(k), sn(k);
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    cs[j] = std::cos(double(th[j]));
    sn[j] = std::sin(double(th[j]));
    st_re[j] = s[j] * cs[j] - s[k + j] * sn[j];
    st_im[j] = s[j] * sn[j] + s[k + j] * cs[j];
    ot_re[j] = o[j] * cs[j] - o[k + j] * sn[j];
    ot_im[j] = o[j] * sn[j] + o[k + j] * cs[j];
    z_re[j] = st_re[j] + r[j] - ot_re[j];
    z_im[j] = st_im[j] + r[k + j] + ot_im[j];
    acc += detail::norm_term(z_re[j], z_im[j], p.norm);
  }
  double inv = 0.0;
  if (p.norm == Norm::L2) {
    double f = std::sqrt(acc);
    inv = f > 0 ? 1.0 / f : 0.0;
  }
  auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };

  double* gs = g.entity(q.subject);
  double* go = g.entity(q.object);
  double* gr = g.relation(q.relation, q.slot, p.dual);
  double* gt = g.phase(q.step);
  for (std::size_t j = 0; j < k; ++j) {
    double d_re, d_im;
    if (p.norm == Norm::L2) {
      d_re = z_re[j] * inv;
      d_im = z_im[j] * inv;
    } else {
      d_re = sign(z_re[j]);
      d_im = sign(z_im[j]);
    }
    d_re *= weight;
    d_im *= weight;
    gr[j] += d_re;
    gr[k + j] += d_im;
    gs[j] += d_re * cs[j] + d_im * sn[j];
    gs[k + j] += -d_re * sn[j] + d_im * cs[j];
    go[j] += -d_re * cs[j] + d_im * sn[j];
    go[k + j] += d_re * sn[j] + d_im * cs[j];
    gt[j] += d_re * (ot_im[j] - st_im[j]) + d_im * (st_re[j] + ot_re[j]);
  }
}

// Mean batch loss; the gradient of that mean is accumulated into `g`
// (which is cleared first).
template <class T>
double compute_gradients(const BasicParams<T>& p, const Batch& batch, double margin, Gradients<T>& g) {
  if (batch.positives.empty()) throw UsageError("empty batch");
  if (batch.negatives.size() != batch.positives.size() * static_cast<std::size_t>(batch.ratio)) {
    throw UsageError("batch negatives do not match ratio");
  }
  g.clear();
  double inv_b = 1.0 / static_cast<double>(batch.positives.size());
  double inv_eta = 1.0 / static_cast<double>(batch.ratio);
  double total = 0.0;
  std::vector<double> neg(static_cast<std::size_t>(batch.ratio));
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const auto& pos = batch.positives[i];
    double fp = score_point(p, pos);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      neg[j] = score_point(p, batch.negatives[i * neg.size() + j]);
    }
    total += loss(fp, neg, margin);
    accumulate_score_gradient(p, pos, inv_b * sigmoid(fp - margin), g);
    for (std::size_t j = 0; j < neg.size(); ++j) {
      accumulate_score_gradient(p, batch.negatives[i * neg.size() + j], -inv_b * inv_eta * sigmoid(margin - neg[j]),
                                g);
    }
  }
  return total * inv_b;
}

namespace detail {

template <class T>
void adagrad_rows(std::vector<T>& values, std::vector<T>& acc, const std::vector<double>& grad,
                  const std::vector<std::int32_t>& rows, std::size_t width, double lr) {
  for (auto r : rows) {
    std::size_t base = static_cast<std::size_t>(r) * width;
    for (std::size_t j = base; j < base + width; ++j) {
      double gj = grad[j];
      if (gj == 0.0) continue;
      double a = double(acc[j]) + gj * gj;
      acc[j] = static_cast<T>(a);
      values[j] = static_cast<T>(double(values[j]) - lr * gj / (std::sqrt(a) + kAdagradEpsilon));
    }
  }
}

template <class T>
void check_finite(const std::vector<double>& grad, const std::vector<std::int32_t>& rows, std::size_t width) {
  for (auto r : rows) {
    std::size_t base = static_cast<std::size_t>(r) * width;
    for (std::size_t j = base; j < base + width; ++j) {
      if (!std::isfinite(grad[j])) throw NumericalError("non-finite gradient");
    }
  }
}

}  // namespace detail

// Per-coordinate Adagrad on the rows touched in `g`.
template <class T>
void adagrad_update(BasicParams<T>& p, const Gradients<T>& g, double lr) {
  std::size_t k = p.k();
  detail::check_finite<T>(g.entity_buffer(), g.touched_entities(), 2 * k);
  detail::check_finite<T>(g.relation_begin_buffer(), g.touched_relations_begin(), 2 * k);
  detail::check_finite<T>(g.relation_end_buffer(), g.touched_relations_end(), 2 * k);
  detail::check_finite<T>(g.phase_buffer(), g.touched_steps(), k);
  detail::adagrad_rows(p.entity, p.entity_acc, g.entity_buffer(), g.touched_entities(), 2 * k, lr);
  detail::adagrad_rows(p.relation_begin, p.relation_begin_acc, g.relation_begin_buffer(),
                       g.touched_relations_begin(), 2 * k, lr);
  detail::adagrad_rows(p.relation_end, p.relation_end_acc, g.relation_end_buffer(), g.touched_relations_end(),
                       2 * k, lr);
  detail::adagrad_rows(p.phase, p.phase_acc, g.phase_buffer(), g.touched_steps(), k, lr);
}

// One optimizer step; returns the mean loss of the batch before the update.
template <class T>
double grad_step(BasicParams<T>& p, const Batch& batch, const TrainConfig& cfg, Gradients<T>& g) {
  double l = compute_gradients(p, batch, cfg.margin, g);
  if (!std::isfinite(l)) throw NumericalError("non-finite loss");
  adagrad_update(p, g, cfg.lr);
  return l;
}

template <class T>
double grad_step(BasicParams<T>& p, const Batch& batch, const TrainConfig& cfg) {
  Gradients<T> g(p);
  return grad_step(p, batch, cfg, g);
}

struct TrainProblem {
  std::vector<TrainQuad> train;
  std::vector<Quadruple> valid;
  FilterSet filter;  // positives of all splits; unused when valid is empty
  TimeBinning binning;
  std::int32_t n_entities = 0;
  std::int32_t n_relations = 0;
  bool dual = false;
};

struct ValidationRecord {
  std::int32_t epoch = 0;
  double train_loss = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  double seconds = 0.0;
};

inline void write_log_header(std::ostream& out) {
  out << "epoch\ttrain_loss\tvalid_mrr\thits@1\thits@3\thits@10\tseconds\n";
}

inline void write_log_line(std::ostream& out, const ValidationRecord& r) {
  out << r.epoch << "\t" << r.train_loss << "\t" << r.mrr << "\t" << r.hits1 << "\t" << r.hits3 << "\t" << r.hits10
      << "\t" << r.seconds << "\n";
}

template <class T>
struct TrainResult {
  BasicParams<T> params;  // best snapshot by validation MRR
  std::vector<ValidationRecord> history;
  std::vector<double> epoch_losses;
  std::int32_t best_epoch = 0;
  double best_mrr = -1.0;
};

// Minibatch Adagrad with validation-MRR early stopping. Validation runs every
// `valid_every` epochs and after the final epoch; without a validation split
// the last parameters are returned.
template <class T = float>
TrainResult<T> train(const TrainProblem& prob, const TrainConfig& cfg,
                     const std::function<void(const ValidationRecord&)>& on_validation = {}) {
  cfg.validate();
  if (prob.train.empty()) throw UsageError("train: empty training set");
  auto start = std::chrono::steady_clock::now();
  TrainResult<T> result;
  BasicParams<T> params =
      init_params<T>(prob.n_entities, prob.n_relations, prob.binning.size(), cfg.dim, prob.dual, cfg.seed, cfg.norm);
  result.params = params;
  if (cfg.max_epochs == 0) return result;

  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995a3c9f2d7ull);
  std::vector<TrainQuad> order = prob.train;
  Gradients<T> grads(params);
  Batch batch;
  batch.ratio = cfg.neg_ratio;
  std::int32_t stale = 0;
  std::int32_t last_validated = 0;
  bool validate_enabled = !prob.valid.empty();

  auto run_validation = [&](std::int32_t epoch, double epoch_loss) {
    EvalReport rep = evaluate(params, prob.valid, prob.filter, prob.binning, EvalOptions{cfg.ties, cfg.threads});
    ValidationRecord rec{epoch,     epoch_loss, rep.mrr,
                         rep.hits1, rep.hits3,  rep.hits10,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    result.history.push_back(rec);
    if (on_validation) on_validation(rec);
    last_validated = epoch;
    if (rep.mrr > result.best_mrr) {
      result.best_mrr = rep.mrr;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else {
      ++stale;
    }
  };

  double epoch_loss = 0.0;
  for (std::int32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      batch.positives.assign(order.begin() + static_cast<std::ptrdiff_t>(b),
                             order.begin() + static_cast<std::ptrdiff_t>(e));
      batch.negatives.clear();
      for (const auto& q : batch.positives) {
        auto negs = sample_negatives(q, cfg.neg_ratio, prob.n_entities, rng);
        batch.negatives.insert(batch.negatives.end(), negs.begin(), negs.end());
      }
      sum += grad_step(params, batch, cfg, grads);
      ++n_batches;
    }
    epoch_loss = sum / static_cast<double>(n_batches);
    result.epoch_losses.push_back(epoch_loss);
    if (validate_enabled && epoch % cfg.valid_every == 0) {
      run_validation(epoch, epoch_loss);
      if (stale >= cfg.patience) break;
    }
  }
  std::int32_t epochs_run = static_cast<std::int32_t>(result.epoch_losses.size());
  if (!validate_enabled) {
    result.params = params;
    result.best_epoch = epochs_run;
  } else if (last_validated != epochs_run) {
    run_validation(epochs_run, epoch_loss);
  }
  return result;
}

}  // namespace tero
