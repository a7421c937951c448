#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tero/binning.hpp"
#include "tero/data.hpp"
#include "tero/error.hpp"

namespace tero {

// Preprocessing artifacts shared by training, evaluation and prediction:
//   entities.tsv, relations.tsv  one `id⭾name` line per entry
//   binning.tsv                  time binning manifest
//   meta.tsv                     dataset format
struct Sidecar {
  Vocabulary vocab;
  TimeBinning binning;
  Format format = Format::PointTsv;
};

inline void write_sidecar(const std::filesystem::path& dir, const Sidecar& s) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("entities.tsv");
    write_vocab(out, s.vocab.entities);
  }
  {
    auto out = open("relations.tsv");
    write_vocab(out, s.vocab.relations);
  }
  {
    auto out = open("binning.tsv");
    write_binning_manifest(out, s.binning);
  }
  {
    auto out = open("meta.tsv");
    out << "format\t" << format_name(s.format) << "\n";
  }
}

inline Sidecar read_sidecar(const std::filesystem::path& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) throw DataError("cannot open " + (dir / name).string());
    return in;
  };
  Sidecar s;
  {
    auto in = open("entities.tsv");
    s.vocab.entities = read_vocab(in);
  }
  {
    auto in = open("relations.tsv");
    s.vocab.relations = read_vocab(in);
  }
  {
    auto in = open("binning.tsv");
    s.binning = read_binning_manifest(in);
  }
  {
    auto in = open("meta.tsv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("format\t", 0) == 0) s.format = parse_format(line.substr(7));
    }
  }
  return s;
}

}  // namespace tero
