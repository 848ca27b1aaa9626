#include "phonemt/utf8.hpp"

#include <array>

namespace phonemt::utf8 {

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw Utf8Error("malformed UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size())
      throw Utf8Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80)
        throw Utf8Error("malformed UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr std::array<char32_t, 5> min_cp = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < min_cp[len])
      throw Utf8Error("overlong UTF-8 encoding at offset " + std::to_string(i));
    if (cp >= 0xD800 && cp <= 0xDFFF)
      throw Utf8Error("surrogate code point at offset " + std::to_string(i));
    if (cp > 0x10FFFF)
      throw Utf8Error("code point out of range at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) out += encode(cp);
  return out;
}

std::size_t scalar_count(std::string_view s) { return decode(s).size(); }

bool is_whitespace(char32_t c) {
  switch (c) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x00A0:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_combining(char32_t c) {
  return (c >= 0x0300 && c <= 0x036F) || (c >= 0x1AB0 && c <= 0x1AFF) ||
         (c >= 0x1DC0 && c <= 0x1DFF) || (c >= 0x20D0 && c <= 0x20FF) ||
         (c >= 0xFE20 && c <= 0xFE2F);
}

bool is_tie_bar(char32_t c) { return c == 0x0361 || c == 0x035C; }

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    switch (c) {
      case U'!':
      case U'"':
      case U'#':
      case U'%':
      case U'&':
      case U'\'':
      case U'(':
      case U')':
      case U'*':
      case U',':
      case U'-':
      case U'.':
      case U'/':
      case U':':
      case U';':
      case U'?':
      case U'@':
      case U'[':
      case U'\\':
      case U']':
      case U'_':
      case U'{':
      case U'}':
        return true;
      default:
        return false;
    }
  }
  switch (c) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:  // section sign
    case 0x00AB:  // left guillemet
    case 0x00B6:  // pilcrow
    case 0x00B7:  // middle dot
    case 0x00BB:  // right guillemet
    case 0x00BF:  // inverted question
    case 0x3001:
    case 0x3002:
    case 0x3003:
    case 0xFF01:
    case 0xFF0C:
    case 0xFF0E:
    case 0xFF1A:
    case 0xFF1B:
    case 0xFF1F:
      return true;
    default:
      break;
  }
  if (c >= 0x2010 && c <= 0x2027) return true;  // hyphens, dashes, quotes, bullets
  if (c >= 0x2030 && c <= 0x205E) return true;  // permille, daggers, ellipsis kin
  if (c >= 0x2E00 && c <= 0x2E52) return true;  // supplemental punctuation
  if (c >= 0x3008 && c <= 0x3011) return true;  // CJK brackets
  if (c >= 0x3014 && c <= 0x301F) return true;
  return false;
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 0x20;  // Latin-1 caps
  if (c == 0x0178) return 0x00FF;                                  // Y with diaeresis
  // Latin Extended-A comes in upper/lower pairs.
  if (c >= 0x0100 && c <= 0x0137 && (c % 2) == 0) return c + 1;
  if (c >= 0x0139 && c <= 0x0148 && (c % 2) == 1) return c + 1;
  if (c >= 0x014A && c <= 0x0177 && (c % 2) == 0) return c + 1;
  if (c >= 0x0179 && c <= 0x017E && (c % 2) == 1) return c + 1;
  return c;
}

std::string to_lower_copy(std::string_view s) {
  std::u32string cps = decode(s);
  for (auto& c : cps) c = to_lower(c);
  return encode(cps);
}

}  // namespace phonemt::utf8
