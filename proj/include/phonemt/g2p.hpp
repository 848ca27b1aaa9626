#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phonemt/phoneme.hpp"

// Grapheme-to-phoneme conversion. Two backends: a lexicon with
// letter-to-sound fallback (hermetic, used by tests and the bundled toy
// language), and an external line-oriented phonemizer process pool
// (espeak-ng compatible). Both sit behind a persistent append-only cache.

namespace phonemt {

struct G2pError : std::runtime_error {
  enum class Kind {
    FileNotFound,
    MalformedLine,
    InvalidPhonemes,
    NoRuleApplies,
    BackendUnavailable,
    BadSpec,
  };
  Kind kind;
  std::size_t line = 0;  // 1-based, for file-shaped errors

  G2pError(Kind k, const std::string& msg, std::size_t line_number = 0)
      : std::runtime_error(msg), kind(k), line(line_number) {}
};

struct Lexicon {
  std::string language;
  std::unordered_map<std::string, std::string> entries;  // lowercase word -> phonemes
  std::size_t duplicate_warnings = 0;

  // Case-insensitive; nullptr on miss. An empty pronunciation is a valid
  // hit (the word is silent / absorbed by a neighbour).
  const std::string* lookup(std::string_view word) const;
};

// File format: UTF-8 lines "word<TAB>phoneme string", '#' comments and blank
// lines allowed. Duplicate keys: last wins, counted in duplicate_warnings.
Lexicon load_lexicon(const std::filesystem::path& path, std::string language = "");

// Letter-to-sound rules: longest match, left to right, no backtracking.
class RuleTable {
 public:
  void add(std::string_view pattern, std::string_view phonemes);
  bool empty() const { return rules_.empty(); }
  std::size_t size() const { return rules_.size(); }

  // Same file format as lexicons; patterns are grapheme substrings.
  static RuleTable load(const std::filesystem::path& path);

  // Longest pattern matching `word` at scalar position `pos`; -1 if none.
  int match_at(const std::u32string& word, std::size_t pos) const;
  const std::string& phonemes(int rule_index) const { return rules_[rule_index].phonemes; }
  std::size_t pattern_length(int rule_index) const { return rules_[rule_index].pattern.size(); }

 private:
  struct Rule {
    std::u32string pattern;  // lowercased scalars
    std::string phonemes;
  };
  std::vector<Rule> rules_;  // sorted by decreasing pattern length, stable
};

// Lexicon lookup first, then longest-match rules. Strict mode throws
// NoRuleApplies when a character is covered by neither; permissive mode
// passes it through.
std::string phonemize_word(std::string_view word, const Lexicon& lexicon,
                           const RuleTable& rules, ParseMode mode = ParseMode::Strict);

enum class G2pBackendKind { LexiconRules, ExternalCommand };

struct G2pBackendSpec {
  G2pBackendKind kind = G2pBackendKind::LexiconRules;
  std::filesystem::path lexicon_path;           // LexiconRules
  std::filesystem::path rules_path;             // LexiconRules, optional
  std::vector<std::string> command;             // ExternalCommand argv
  std::string language;
  std::filesystem::path cache_dir;              // optional
  ParseMode mode = ParseMode::Strict;

  void validate() const;  // throws G2pError{BadSpec}

  // Best-effort reconstruction of the paper's tool invocation: reads lines
  // from stdin, writes one IPA line per input line.
  static std::vector<std::string> default_espeak_command(const std::string& language);
};

struct StreamSummary {
  std::size_t lines = 0;
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
  std::size_t errors = 0;
  bool aborted = false;  // error threshold hit
};

struct LineError {
  std::size_t line_number;  // 1-based position in the input stream
  std::string message;
};

struct StreamResult {
  std::vector<std::string> outputs;  // empty string for failed lines
  std::vector<LineError> errors;     // ordered by line number
  StreamSummary summary;
};

class G2pCache;
class LineProcessPool;

class G2pBackend {
 public:
  explicit G2pBackend(G2pBackendSpec spec);
  ~G2pBackend();

  G2pBackend(const G2pBackend&) = delete;
  G2pBackend& operator=(const G2pBackend&) = delete;

  const G2pBackendSpec& spec() const { return spec_; }

  // Identifies the backend for cache pinning: external tool version string,
  // or a content hash of the lexicon and rules.
  const std::string& version() const { return version_; }

  // Strips punctuation per the evaluation policy, then phonemizes: word by
  // word for LexiconRules, whole line through the child process otherwise.
  std::string phonemize_line(const std::string& line);

  // Order-preserving parallel map over the lines. Output i corresponds to
  // input i for any worker count. Stops early once `error_threshold` lines
  // have failed.
  StreamResult phonemize_stream(const std::vector<std::string>& lines, int workers,
                                std::size_t error_threshold = SIZE_MAX);

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  friend class LineProcessPool;
  std::string phonemize_uncached(const std::string& line, int worker_index);

  G2pBackendSpec spec_;
  std::string version_;
  Lexicon lexicon_;
  RuleTable rules_;
  std::unique_ptr<G2pCache> cache_;
  std::unique_ptr<LineProcessPool> pool_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

inline std::string phonemize_line(const std::string& line, G2pBackend& backend) {
  return backend.phonemize_line(line);
}

inline StreamResult phonemize_stream(const std::vector<std::string>& lines,
                                     G2pBackend& backend, int workers,
                                     std::size_t error_threshold = SIZE_MAX) {
  return backend.phonemize_stream(lines, workers, error_threshold);
}

}  // namespace phonemt
