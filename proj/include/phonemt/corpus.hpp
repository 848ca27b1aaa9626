#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonemt/g2p.hpp"

// Line-aligned parallel corpora in the WMT two-file convention, plus the
// operation this toolkit exists for: phonemizing both sides.

namespace phonemt {

struct CorpusError : std::runtime_error {
  enum class Kind { FileNotFound, LengthMismatch, TooSmall, IoError, WrongRepresentation };
  Kind kind;
  CorpusError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct ParallelPair {
  std::string source;
  std::string target;
  std::size_t origin_line = 0;  // 1-based line in the input files

  bool operator==(const ParallelPair&) const = default;
};

enum class Representation { Graphemic, Phonemic };

struct ParallelCorpus {
  std::vector<ParallelPair> pairs;
  std::string source_lang;
  std::string target_lang;
  Representation representation = Representation::Graphemic;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

struct LoadReport {
  std::size_t dropped_empty = 0;  // pairs with an empty side
};

// Line i of each file forms pair i. Pairs where either side trims to empty
// are dropped and counted in `report` when given.
ParallelCorpus load_parallel(const std::filesystem::path& source_path,
                             const std::filesystem::path& target_path,
                             std::string source_lang = "", std::string target_lang = "",
                             LoadReport* report = nullptr);

struct PhonemizeReport {
  std::size_t dropped_pairs = 0;
  std::vector<LineError> errors;  // origin-line attributed
  StreamSummary source_summary;
  StreamSummary target_summary;
};

// Phonemizes both sides (the target side too — that is the point of the
// experiment). Pairs whose conversion fails in strict mode are dropped and
// reported rather than aborting a long run.
ParallelCorpus phonemize_corpus(const ParallelCorpus& corpus, G2pBackend& source_backend,
                                G2pBackend& target_backend, int workers = 1,
                                PhonemizeReport* report = nullptr);

// Deterministic seeded shuffle, then a ceil(f*n) / rest partition.
std::pair<ParallelCorpus, ParallelCorpus> split_corpus(const ParallelCorpus& corpus,
                                                       double train_fraction,
                                                       std::uint64_t seed);

struct FilterReport {
  std::size_t dropped_too_long = 0;
  std::size_t dropped_ratio = 0;
};

// Standard MT data hygiene: drops pairs with an over-long side (whitespace
// tokens) or an extreme source/target length ratio.
ParallelCorpus filter_pairs(const ParallelCorpus& corpus, std::size_t max_len,
                            double ratio_cap, FilterReport* report = nullptr);

void write_corpus(const ParallelCorpus& corpus, const std::filesystem::path& source_path,
                  const std::filesystem::path& target_path);

struct CorpusStats {
  std::size_t pair_count = 0;
  std::size_t source_tokens = 0;
  std::size_t target_tokens = 0;
  std::size_t source_distinct_symbols = 0;  // distinct Unicode scalars, spaces excluded
  std::size_t target_distinct_symbols = 0;
  // Sentence-length histogram over source tokens: bucket k covers
  // [k*bucket_width+1, (k+1)*bucket_width].
  static constexpr std::size_t bucket_width = 10;
  std::vector<std::size_t> length_histogram;

  std::string to_text() const;
};

CorpusStats corpus_stats(const ParallelCorpus& corpus);

std::vector<std::string> tokenize_whitespace(std::string_view line);

}  // namespace phonemt
