#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tero/data.hpp"
#include "tero/error.hpp"
#include "tero/eval.hpp"
#include "tero/training.hpp"

namespace tero {

enum class DualMode { Auto, On, Off };

// Everything a run needs. Zero granularity values mean "pick from format":
// 1-day steps for point datasets, a 300-fact threshold for interval ones.
struct RunConfig {
  std::string train;
  std::string valid;
  std::string test;
  std::string format = "auto";
  std::int32_t dim = 500;
  double margin = 20.0;
  double lr = 0.1;
  std::int32_t neg_ratio = 10;
  std::int32_t batch_size = 512;
  std::int64_t time_unit = 0;
  std::int64_t time_threshold = 0;
  int norm = 1;
  std::string dual = "auto";
  std::uint64_t seed = 42;
  std::int32_t max_epochs = 5000;
  std::int32_t valid_every = 100;
  std::int32_t patience = 5;
  std::string checkpoint;
  std::string out_dir = "tero_out";
  int threads = 1;
  std::string profile;
  std::string ties = "mean";
};

using Profile = std::vector<std::pair<std::string, std::string>>;

// Published per-dataset settings; keys are long flag names.
inline const std::map<std::string, Profile>& profiles() {
  static const std::map<std::string, Profile> table{
      {"icews14",
       {{"format", "point"}, {"dim", "500"}, {"neg-ratio", "10"}, {"lr", "0.1"}, {"margin", "110"},
        {"time-unit", "1"}}},
      {"icews05-15",
       {{"format", "point"}, {"dim", "500"}, {"neg-ratio", "10"}, {"lr", "0.1"}, {"margin", "120"},
        {"time-unit", "2"}}},
      {"yago11k",
       {{"format", "interval"}, {"dim", "500"}, {"neg-ratio", "10"}, {"lr", "0.1"}, {"margin", "50"},
        {"time-threshold", "100"}}},
      {"wikidata12k",
       {{"format", "interval"}, {"dim", "500"}, {"neg-ratio", "10"}, {"lr", "0.3"}, {"margin", "20"},
        {"time-threshold", "300"}}},
  };
  return table;
}

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "format") c.format = value;
    else if (key == "dim") c.dim = std::stoi(value);
    else if (key == "margin") c.margin = std::stod(value);
    else if (key == "lr") c.lr = std::stod(value);
    else if (key == "neg-ratio") c.neg_ratio = std::stoi(value);
    else if (key == "batch-size") c.batch_size = std::stoi(value);
    else if (key == "time-unit") c.time_unit = std::stoll(value);
    else if (key == "time-threshold") c.time_threshold = std::stoll(value);
    else if (key == "norm") c.norm = std::stoi(value);
    else if (key == "dual") c.dual = value;
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "max-epochs") c.max_epochs = std::stoi(value);
    else if (key == "valid-every") c.valid_every = std::stoi(value);
    else if (key == "patience") c.patience = std::stoi(value);
    else throw UsageError("unknown setting '" + key + "'");
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const UsageError*>(&e)) throw;
    throw UsageError("bad value '" + value + "' for " + key);
  }
}

// Applies a named profile to every setting for which `is_explicit` is false.
template <class IsExplicit>
void apply_profile(RunConfig& c, const std::string& name, IsExplicit is_explicit) {
  auto it = profiles().find(name);
  if (it == profiles().end()) throw UsageError("unknown profile '" + name + "'");
  for (const auto& [key, value] : it->second) {
    if (!is_explicit(key)) apply_setting(c, key, value);
  }
}

// Resolves "auto" by counting the fields of the first nonblank line.
inline Format resolve_format(const RunConfig& c) {
  if (c.format != "auto") return parse_format(c.format);
  std::ifstream in(c.train);
  if (!in) throw DataError("cannot open " + c.train);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto n = detail::split_tabs(line).size();
    if (n == 4) return Format::PointTsv;
    if (n == 5) return Format::IntervalTsv;
    throw DataError(c.train + ":1: cannot infer format from " + std::to_string(n) + " fields");
  }
  throw DataError("training split " + c.train + " contains no facts");
}

inline Granularity resolve_granularity(const RunConfig& c, Format f) {
  if (c.time_unit > 0 && c.time_threshold > 0) throw UsageError("--time-unit and --time-threshold are exclusive");
  if (c.time_unit < 0 || c.time_threshold < 0) throw UsageError("time granularity must be positive");
  if (c.time_unit > 0) return {TimeBinning::Mode::FixedUnit, c.time_unit};
  if (c.time_threshold > 0) return {TimeBinning::Mode::Threshold, c.time_threshold};
  if (f == Format::PointTsv) return {TimeBinning::Mode::FixedUnit, 1};
  return {TimeBinning::Mode::Threshold, 300};
}

inline bool resolve_dual(const RunConfig& c, Format f) {
  if (c.dual == "on") return true;
  if (c.dual == "off") return false;
  if (c.dual == "auto") return f == Format::IntervalTsv;
  throw UsageError("--dual must be auto, on or off");
}

inline TiePolicy resolve_ties(const std::string& s) {
  if (s == "mean") return TiePolicy::Mean;
  if (s == "optimistic") return TiePolicy::Optimistic;
  if (s == "pessimistic") return TiePolicy::Pessimistic;
  throw UsageError("--ties must be mean, optimistic or pessimistic");
}

inline TrainConfig to_train_config(const RunConfig& c) {
  TrainConfig t;
  t.dim = c.dim;
  t.batch_size = c.batch_size;
  t.neg_ratio = c.neg_ratio;
  t.margin = c.margin;
  t.lr = c.lr;
  t.max_epochs = c.max_epochs;
  t.valid_every = c.valid_every;
  t.patience = c.patience;
  if (c.norm != 1 && c.norm != 2) throw UsageError("--norm must be 1 or 2");
  t.norm = c.norm == 2 ? Norm::L2 : Norm::L1;
  t.seed = c.seed;
  t.threads = c.threads;
  t.ties = resolve_ties(c.ties);
  t.validate();
  return t;
}

}  // namespace tero
