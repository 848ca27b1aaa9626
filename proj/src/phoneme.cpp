#include "phonemt/phoneme.hpp"

#include <algorithm>

#include "phonemt/utf8.hpp"

namespace phonemt {

namespace {

constexpr char32_t kIpaPrimary = 0x02C8;    // ˈ
constexpr char32_t kIpaSecondary = 0x02CC;  // ˌ
constexpr char32_t kIpaLength = 0x02D0;     // ː

bool is_primary_mark(char32_t c) { return c == kIpaPrimary || c == U'\''; }
bool is_secondary_mark(char32_t c) { return c == kIpaSecondary || c == U','; }
bool is_length_mark(char32_t c) { return c == kIpaLength || c == U':'; }

[[noreturn]] void fail(std::size_t pos, const std::string& what) {
  throw PhonemeError(PhonemeError::Kind::EmptyWord,
                     what + " at scalar offset " + std::to_string(pos));
}

}  // namespace

TokenizeResult tokenize(std::string_view text, ParseMode mode) {
  const bool strict = mode == ParseMode::Strict;
  std::u32string cps;
  try {
    cps = utf8::decode(text);
  } catch (const utf8::Utf8Error& e) {
    throw PhonemeError(PhonemeError::Kind::MalformedInput, e.what());
  }

  TokenizeResult result;
  PhonemeWord word;
  Stress pending = Stress::None;
  bool can_extend = false;  // last scalar belonged to the last token of `word`
  bool tie_open = false;    // last token's base ends in a tie bar
  bool saw_separator = false;

  auto flush_word = [&](std::size_t pos, bool at_separator) {
    if (pending != Stress::None) {
      if (strict) fail(pos, "dangling stress marker");
      ++result.warnings;
      pending = Stress::None;
    }
    if (word.empty()) {
      if (at_separator || saw_separator) {
        if (strict) fail(pos, "empty phoneme-word");
        ++result.warnings;
      }
      // Empty input stays an empty sequence.
    } else {
      result.seq.words.push_back(std::move(word));
      word.clear();
    }
    can_extend = false;
    tie_open = false;
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (utf8::is_whitespace(c)) {
      flush_word(i, true);
      saw_separator = true;
      continue;
    }
    if (is_primary_mark(c) || is_secondary_mark(c)) {
      if (pending != Stress::None) {
        if (strict) fail(i, "stress marker with no adjacent base symbol");
        ++result.warnings;
      }
      pending = is_primary_mark(c) ? Stress::Primary : Stress::Secondary;
      can_extend = false;
      tie_open = false;
      continue;
    }
    if (is_length_mark(c)) {
      if (word.empty() || pending != Stress::None) {
        if (strict) fail(i, "length marker with no adjacent base symbol");
        ++result.warnings;
        continue;
      }
      word.back().long_mark = true;
      continue;
    }
    if (utf8::is_combining(c)) {
      if (!can_extend) {
        if (strict) fail(i, "combining mark with no adjacent base symbol");
        ++result.warnings;
        continue;
      }
      word.back().base += utf8::encode(c);
      if (utf8::is_tie_bar(c)) tie_open = true;
      continue;
    }
    // Base scalar.
    if (tie_open && can_extend) {
      word.back().base += utf8::encode(c);
      tie_open = false;
    } else {
      PhonemeToken tok;
      tok.base = utf8::encode(c);
      tok.stress = pending;
      pending = Stress::None;
      word.push_back(std::move(tok));
    }
    can_extend = true;
  }
  flush_word(cps.size(), false);
  return result;
}

std::string render(const PhonemeSequence& seq) {
  std::string out;
  bool first_word = true;
  for (const auto& word : seq.words) {
    if (!first_word) out += ' ';
    first_word = false;
    for (const auto& tok : word) {
      if (tok.stress == Stress::Primary) out += '\'';
      if (tok.stress == Stress::Secondary) out += ',';
      out += tok.base;
      if (tok.long_mark) out += ':';
    }
  }
  return out;
}

void NormalizationPolicy::add_variant_class(const std::set<std::string>& cls) {
  if (cls.size() < 2)
    throw std::invalid_argument("variant class needs at least two members");
  for (const auto& member : cls)
    if (rep_.count(member))
      throw std::invalid_argument("variant classes are not disjoint: " + member);
  const std::string& representative = *cls.begin();
  for (const auto& member : cls) rep_[member] = representative;
  classes_.push_back(cls);
}

const std::string* NormalizationPolicy::representative(const std::string& base) const {
  auto it = rep_.find(base);
  return it == rep_.end() ? nullptr : &it->second;
}

namespace {

bool all_punctuation(const std::string& base) {
  for (char32_t c : utf8::decode(base))
    if (!utf8::is_punctuation(c)) return false;
  return true;
}

}  // namespace

PhonemeSequence normalize(const PhonemeSequence& seq, const NormalizationPolicy& policy) {
  PhonemeSequence out;
  out.words.reserve(seq.words.size());
  for (const auto& word : seq.words) {
    PhonemeWord nw;
    nw.reserve(word.size());
    for (const auto& tok : word) {
      if (policy.strip_punctuation && all_punctuation(tok.base)) continue;
      PhonemeToken nt = tok;
      if (policy.strip_primary_stress && nt.stress == Stress::Primary)
        nt.stress = Stress::None;
      if (policy.strip_secondary_stress && nt.stress == Stress::Secondary)
        nt.stress = Stress::None;
      if (const std::string* rep = policy.representative(nt.base)) nt.base = *rep;
      nw.push_back(std::move(nt));
    }
    if (!nw.empty()) out.words.push_back(std::move(nw));
  }
  return out;
}

bool phoneme_equivalent(const PhonemeSequence& a, const PhonemeSequence& b,
                        const NormalizationPolicy& policy) {
  return normalize(a, policy) == normalize(b, policy);
}

std::string strip_punctuation(std::string_view text, std::u32string_view extra,
                              std::u32string_view keep) {
  const std::u32string cps = utf8::decode(text);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (utf8::is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    const bool kept = keep.find(c) != std::u32string_view::npos;
    if (!kept &&
        (utf8::is_punctuation(c) || extra.find(c) != std::u32string_view::npos))
      continue;
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return utf8::encode(out);
}

std::u32string_view phoneme_marker_scalars() {
  static const std::u32string markers = {U'\'', U',', U':', kIpaPrimary,
                                         kIpaSecondary, kIpaLength};
  return markers;
}

}  // namespace phonemt
