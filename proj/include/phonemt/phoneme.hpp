#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Parsing, rendering and normalization of espeak-ng-style IPA phoneme
// strings. Stress may be written with the IPA marks (ˈ ˌ) or their ASCII
// look-alikes (' ,); vowel length with ː or :. Output always uses the ASCII
// style, so fixtures can be compared byte for byte.

namespace phonemt {

enum class Stress : std::uint8_t { None, Primary, Secondary };

struct PhonemeToken {
  // One base scalar plus any combining diacritics (a tie bar joins the next
  // scalar into the same base, e.g. d͡ʒ). Never contains stress or length
  // marks.
  std::string base;
  Stress stress = Stress::None;
  bool long_mark = false;

  bool operator==(const PhonemeToken&) const = default;
};

using PhonemeWord = std::vector<PhonemeToken>;

struct PhonemeSequence {
  std::vector<PhonemeWord> words;

  bool operator==(const PhonemeSequence&) const = default;
  bool empty() const { return words.empty(); }
};

struct PhonemeError : std::runtime_error {
  enum class Kind { EmptyWord, MalformedInput };
  Kind kind;
  PhonemeError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

enum class ParseMode { Strict, Permissive };

struct TokenizeResult {
  PhonemeSequence seq;
  // Permissive mode only: dangling markers dropped plus empty words skipped.
  std::size_t warnings = 0;
};

// Splits on spaces; attaches stress marks to the following token and length
// marks to the preceding one. Strict mode throws PhonemeError on empty words
// and dangling markers; permissive mode drops them and counts warnings.
TokenizeResult tokenize(std::string_view text, ParseMode mode = ParseMode::Strict);

inline PhonemeSequence tokenize_strict(std::string_view text) {
  return tokenize(text, ParseMode::Strict).seq;
}

// Canonical notation: ' for primary, , for secondary, : for length, single
// spaces between words. tokenize(render(s)) == s for any valid sequence.
std::string render(const PhonemeSequence& seq);

class NormalizationPolicy {
 public:
  bool strip_primary_stress = false;
  bool strip_secondary_stress = false;
  // Length marks are already folded to one flag at parse time; the field is
  // kept so configs can state the choice explicitly.
  bool canonicalize_length = true;
  bool strip_punctuation = false;

  NormalizationPolicy() = default;

  // Classes of base symbols treated as interchangeable; must be pairwise
  // disjoint. Each class collapses to its lexicographically smallest member.
  void add_variant_class(const std::set<std::string>& cls);

  const std::vector<std::set<std::string>>& variant_classes() const { return classes_; }
  const std::string* representative(const std::string& base) const;

  static NormalizationPolicy strip_all_stress() {
    NormalizationPolicy p;
    p.strip_primary_stress = true;
    p.strip_secondary_stress = true;
    return p;
  }

 private:
  std::vector<std::set<std::string>> classes_;
  std::map<std::string, std::string> rep_;
};

// Clears stress flags per policy, collapses variant classes, optionally
// drops punctuation tokens. Idempotent.
PhonemeSequence normalize(const PhonemeSequence& seq, const NormalizationPolicy& policy);

// normalize(a) == normalize(b).
bool phoneme_equivalent(const PhonemeSequence& a, const PhonemeSequence& b,
                        const NormalizationPolicy& policy);

// Removes Unicode punctuation plus `extra`, keeping anything in `keep`;
// collapses whitespace runs to single spaces and trims the ends. `keep`
// exists so phoneme text can retain its ASCII stress/length marks.
std::string strip_punctuation(std::string_view text, std::u32string_view extra = {},
                              std::u32string_view keep = {});

// The marker scalars that double as punctuation (' , :) plus their IPA
// forms; pass as `keep` when stripping phoneme text.
std::u32string_view phoneme_marker_scalars();

}  // namespace phonemt
