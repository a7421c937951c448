#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tero/checkpoint.hpp"
#include "tero/data.hpp"
#include "tero/eval.hpp"
#include "tero/model.hpp"
#include "tero/run_config.hpp"
#include "tero/sidecar.hpp"
#include "tero/training.hpp"

namespace tero::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

namespace fs = std::filesystem;

struct PredictArgs {
  std::string entity;
  std::string relation;
  std::string time;
  std::string time_end;
  std::string side = "object";
  std::int32_t top_n = 10;
};

struct EvalArgs {
  std::string ranks_out;
};

inline void add_dataset_options(CLI::App& app, RunConfig& c) {
  app.add_option("--train", c.train, "Training split (TSV)");
  app.add_option("--valid", c.valid, "Validation split (TSV)");
  app.add_option("--test", c.test, "Test split (TSV)");
  app.add_option("--format", c.format, "Dataset format: point, interval or auto")
      ->check(CLI::IsMember({"auto", "point", "interval", "point-tsv", "interval-tsv"}));
  app.add_option("--time-unit", c.time_unit, "Fixed step length in days (0 = by format)");
  app.add_option("--time-threshold", c.time_threshold, "Minimum facts per clubbed year step (0 = by format)");
  app.add_option("--out-dir", c.out_dir, "Directory for artifacts, logs and reports");
}

inline void add_model_options(CLI::App& app, RunConfig& c) {
  app.add_option("--dim", c.dim, "Embedding dimension k");
  app.add_option("--margin", c.margin, "Margin gamma of the loss");
  app.add_option("--lr", c.lr, "Adagrad learning rate");
  app.add_option("--neg-ratio", c.neg_ratio, "Negatives per positive (eta)");
  app.add_option("--batch-size", c.batch_size, "Minibatch size");
  app.add_option("--norm", c.norm, "Score norm")->check(CLI::IsMember({1, 2}));
  app.add_option("--dual", c.dual, "Dual begin/end relations")->check(CLI::IsMember({"auto", "on", "off"}));
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--max-epochs", c.max_epochs, "Epoch cap");
  app.add_option("--valid-every", c.valid_every, "Epochs between validations");
  app.add_option("--patience", c.patience, "Non-improving validations before stopping");
  app.add_option("--profile", c.profile, "Published dataset preset")
      ->check(CLI::IsMember({"icews14", "icews05-15", "yago11k", "wikidata12k"}));
}

inline void add_runtime_options(CLI::App& app, RunConfig& c) {
  app.add_option("--checkpoint", c.checkpoint, "Checkpoint path (default <out-dir>/model.tero)");
  app.add_option("--threads", c.threads, "Evaluation threads; 1 is the reference mode")->check(CLI::PositiveNumber);
  app.add_option("--ties", c.ties, "Tie handling in ranks")
      ->check(CLI::IsMember({"mean", "optimistic", "pessimistic"}));
}

inline void resolve_profile(CLI::App& app, RunConfig& c) {
  if (c.profile.empty()) return;
  apply_profile(c, c.profile, [&](const std::string& key) {
    auto* opt = app.get_option_no_throw("--" + key);
    return opt != nullptr && opt->count() > 0;
  });
}

inline std::string checkpoint_path(const RunConfig& c) {
  return c.checkpoint.empty() ? (fs::path(c.out_dir) / "model.tero").string() : c.checkpoint;
}

struct Prepared {
  Dataset data;
  Sidecar sidecar;
  bool dual = false;
};

inline Prepared prepare(const RunConfig& c) {
  if (c.train.empty()) throw UsageError("--train is required");
  Format format = resolve_format(c);
  Prepared p;
  p.data = load_dataset(c.train, c.valid, c.test, format);
  auto all = p.data.all();
  p.sidecar.vocab = p.data.vocab;
  p.sidecar.binning = make_binning(all, resolve_granularity(c, format));
  p.sidecar.format = format;
  p.dual = resolve_dual(c, format);
  return p;
}

inline int cmd_preprocess(const RunConfig& c, std::ostream& out) {
  auto p = prepare(c);
  write_sidecar(c.out_dir, p.sidecar);
  out << "n_e\t" << p.data.vocab.entities.size() << "\n";
  out << "n_r\t" << p.data.vocab.relations.size() << "\n";
  out << "n_steps\t" << p.sidecar.binning.size() << "\n";
  out << "train\t" << p.data.train.size() << "\n";
  out << "valid\t" << p.data.valid.size() << "\n";
  out << "test\t" << p.data.test.size() << "\n";
  return kOk;
}

inline int cmd_train(const RunConfig& c, std::ostream& out) {
  TrainConfig tc = to_train_config(c);
  auto p = prepare(c);
  write_sidecar(c.out_dir, p.sidecar);

  TrainProblem prob;
  prob.train = expand_for_training(p.data.train, p.sidecar.binning, p.dual);
  prob.valid = p.data.valid;
  prob.binning = p.sidecar.binning;
  prob.n_entities = p.data.vocab.entities.size();
  prob.n_relations = p.data.vocab.relations.size();
  prob.dual = p.dual;
  if (!prob.valid.empty()) prob.filter = FilterSet(p.data.all(), p.sidecar.binning);

  std::ofstream log(fs::path(c.out_dir) / "train_log.tsv");
  write_log_header(log);
  auto result = train<float>(prob, tc, [&](const ValidationRecord& r) {
    write_log_line(log, r);
    log.flush();
    out << "epoch " << r.epoch << " loss " << r.train_loss << " valid_mrr " << r.mrr << "\n";
  });

  std::string ckpt = checkpoint_path(c);
  fs::path ckpt_dir = fs::path(ckpt).parent_path();
  if (!ckpt_dir.empty()) fs::create_directories(ckpt_dir);
  std::string sidecar_ref =
      fs::relative(fs::absolute(c.out_dir), fs::absolute(ckpt_dir.empty() ? fs::path(".") : ckpt_dir)).string();
  save_checkpoint(ckpt, result.params, sidecar_ref);
  out << "n_e\t" << prob.n_entities << "\n";
  out << "n_r\t" << prob.n_relations << "\n";
  out << "n_steps\t" << prob.binning.size() << "\n";
  out << "params\t" << param_count(result.params) << "\n";
  out << "best_epoch\t" << result.best_epoch << "\n";
  if (!result.history.empty()) out << "best_valid_mrr\t" << result.best_mrr << "\n";
  out << "checkpoint\t" << ckpt << "\n";
  return kOk;
}

struct Loaded {
  Checkpoint ckpt;
  Sidecar sidecar;
};

inline Loaded load_model(const RunConfig& c) {
  std::string ckpt = checkpoint_path(c);
  Loaded l;
  l.ckpt = load_checkpoint(ckpt);
  fs::path side = l.ckpt.sidecar;
  if (side.is_relative()) side = fs::path(ckpt).parent_path() / side;
  l.sidecar = read_sidecar(side);
  const auto& p = l.ckpt.params;
  if (p.n_entities != l.sidecar.vocab.entities.size() || p.n_relations != l.sidecar.vocab.relations.size() ||
      p.n_steps != l.sidecar.binning.size()) {
    throw DataError("checkpoint does not match its sidecar " + side.string());
  }
  return l;
}

inline int cmd_eval(const RunConfig& c, const EvalArgs& args, std::ostream& out) {
  if (c.test.empty()) throw UsageError("--test is required");
  auto l = load_model(c);
  Format format = c.format == "auto" ? l.sidecar.format : parse_format(c.format);
  auto load = [&](const std::string& path) {
    return path.empty() ? std::vector<Quadruple>{} : encode(read_facts(path, format), l.sidecar.vocab);
  };
  auto test = load(c.test);
  if (test.empty()) throw DataError("test split " + c.test + " contains no facts");
  auto known = load(c.train);
  auto valid = load(c.valid);
  known.insert(known.end(), valid.begin(), valid.end());
  known.insert(known.end(), test.begin(), test.end());
  FilterSet filter(known, l.sidecar.binning);
  auto report =
      evaluate(l.ckpt.params, test, filter, l.sidecar.binning, EvalOptions{resolve_ties(c.ties), c.threads});
  write_report(out, report);
  fs::create_directories(c.out_dir);
  std::ofstream tsv(fs::path(c.out_dir) / "eval_report.tsv");
  write_report(tsv, report);
  if (!args.ranks_out.empty()) {
    std::ofstream dump(args.ranks_out);
    if (!dump) throw DataError("cannot write " + args.ranks_out);
    write_rank_dump(dump, report, test, l.sidecar.vocab, format);
  }
  return kOk;
}

inline int cmd_predict(const RunConfig& c, const PredictArgs& a, std::ostream& out) {
  auto l = load_model(c);
  const auto& vocab = l.sidecar.vocab;
  auto entity = vocab.entities.find(a.entity);
  if (!entity) throw DataError("unknown entity '" + a.entity + "'");
  auto relation = vocab.relations.find(a.relation);
  if (!relation) throw DataError("unknown relation '" + a.relation + "'");
  auto begin = parse_date(a.time);
  if (!begin) throw DataError("query time '" + a.time + "' is unknown");
  TimeAnnotation t = TimeAnnotation::point(*begin);
  if (!a.time_end.empty()) {
    auto end = parse_date(a.time_end);
    if (!end) throw DataError("query end time '" + a.time_end + "' is unknown");
    t = TimeAnnotation::interval(*begin, *end);
  }
  if (a.side != "object" && a.side != "subject") throw UsageError("--side must be object or subject");
  Side side = a.side == "object" ? Side::Object : Side::Subject;
  Quadruple q{*entity, *relation, *entity, t};
  std::vector<double> scores;
  score_candidates(l.ckpt.params, q, side, l.sidecar.binning, scores);
  std::vector<std::int32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t x, std::int32_t y) { return scores[std::size_t(x)] < scores[std::size_t(y)]; });
  std::size_t n = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(a.top_n, 0)));
  out << "rank\tentity\tscore\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << i + 1 << "\t" << vocab.entities.name(order[i]) << "\t" << std::setprecision(9)
        << scores[std::size_t(order[i])] << "\n";
  }
  return kOk;
}

// Splices `key = value` lines of a --config file in front of the command
// line flags; with take-last parsing a flag then overrides the file.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      used = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      used = 1;
    } else {
      continue;
    }
    if (!fs::exists(path)) throw CLI::FileError::Missing(path);
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
      if (item.name.empty() || item.name == "++" || item.name == "--") continue;
      injected.push_back("--" + item.name);
      for (const auto& v : item.inputs) injected.push_back(v);
    }
    args.erase(args.begin() + std::ptrdiff_t(i), args.begin() + std::ptrdiff_t(i + used));
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    break;
  }
  return args;
}

// Entry point shared by the `tero` binary and the CLI tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Temporal knowledge graph embedding with time rotations"};
  app.name("tero");
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  EvalArgs eval_args;
  PredictArgs predict_args;

  auto* pre = app.add_subcommand("preprocess", "Build vocabularies and the time binning");
  pre->add_option("--config", config_path, "Config file of `key = value` lines");
  add_dataset_options(*pre, cfg);
  pre->add_option("--profile", cfg.profile, "Published dataset preset")
      ->check(CLI::IsMember({"icews14", "icews05-15", "yago11k", "wikidata12k"}));

  auto* tr = app.add_subcommand("train", "Train a model and write the best checkpoint");
  tr->add_option("--config", config_path, "Config file of `key = value` lines");
  add_dataset_options(*tr, cfg);
  add_model_options(*tr, cfg);
  add_runtime_options(*tr, cfg);

  auto* ev = app.add_subcommand("eval", "Time-wise filtered link prediction on a test split");
  ev->add_option("--config", config_path, "Config file of `key = value` lines");
  add_dataset_options(*ev, cfg);
  add_runtime_options(*ev, cfg);
  ev->add_option("--ranks-out", eval_args.ranks_out, "Per-query rank dump (TSV)");

  auto* pr = app.add_subcommand("predict", "Rank completions of one query");
  pr->add_option("--config", config_path, "Config file of `key = value` lines");
  add_runtime_options(*pr, cfg);
  pr->add_option("--out-dir", cfg.out_dir, "Directory holding model.tero when --checkpoint is unset");
  pr->add_option("--entity", predict_args.entity, "Known entity")->required();
  pr->add_option("--relation", predict_args.relation, "Relation")->required();
  pr->add_option("--time", predict_args.time, "Query date (begin date for intervals)")->required();
  pr->add_option("--time-end", predict_args.time_end, "End date for interval queries");
  pr->add_option("--side", predict_args.side, "Which slot is missing")
      ->check(CLI::IsMember({"object", "subject"}));
  pr->add_option("--top-n", predict_args.top_n, "Number of entities to print")->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> args(argv, argv + argc);
    if (args.size() > 1) args = expand_config(std::move(args));
    std::reverse(args.begin() + 1, args.end());
    args.erase(args.begin());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (auto* sub : {pre, tr}) {
      if (sub->parsed()) resolve_profile(*sub, cfg);
    }
    if (pre->parsed()) return cmd_preprocess(cfg, out);
    if (tr->parsed()) return cmd_train(cfg, out);
    if (ev->parsed()) return cmd_eval(cfg, eval_args, out);
    if (pr->parsed()) return cmd_predict(cfg, predict_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace tero::cli
