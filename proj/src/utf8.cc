#include "bioqa/utf8.h"

#include <algorithm>

namespace bioqa::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool InRange(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

}  // namespace

std::u32string Decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
      min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
      min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
      min_cp = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + extra >= n) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min_cp || cp > 0x10FFFF || InRange(cp, 0xD800, 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string Encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t Length(std::string_view text) { return Decode(text).size(); }

std::string Slice(std::string_view text, std::size_t begin, std::size_t end) {
  const std::u32string decoded = Decode(text);
  end = std::min(end, decoded.size());
  begin = std::min(begin, end);
  return Encode(std::u32string_view(decoded).substr(begin, end - begin));
}

bool IsSpace(char32_t c) {
  return InRange(c, 0x09, 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || InRange(c, 0x2000, 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool IsAsciiUpper(char32_t c) { return InRange(c, 'A', 'Z'); }

bool IsDigit(char32_t c) { return InRange(c, '0', '9'); }

bool IsAlnum(char32_t c) {
  if (c < 0x80) {
    return InRange(c, 'a', 'z') || InRange(c, 'A', 'Z') || IsDigit(c);
  }
  if (IsSpace(c) || c == kReplacement) return false;
  if (InRange(c, 0x80, 0xBF)) {
    // Latin-1 symbols; keep ordinal indicators, micro sign and superscripts.
    return c == 0xAA || c == 0xB2 || c == 0xB3 || c == 0xB5 || c == 0xB9 ||
           c == 0xBA;
  }
  if (c == 0xD7 || c == 0xF7) return false;
  if (InRange(c, 0x2010, 0x206F)) return false;  // general punctuation
  if (InRange(c, 0x20A0, 0x20CF)) return false;  // currency
  if (InRange(c, 0x2190, 0x2BFF)) return false;  // arrows, math, shapes
  if (InRange(c, 0x3000, 0x303F)) return false;  // CJK punctuation
  if (InRange(c, 0xFE30, 0xFE4F)) return false;
  if (InRange(c, 0xFF01, 0xFF0F) || InRange(c, 0xFF1A, 0xFF20) ||
      InRange(c, 0xFF3B, 0xFF40) || InRange(c, 0xFF5B, 0xFF65)) {
    return false;
  }
  return true;
}

char32_t ToLower(char32_t c) {
  if (InRange(c, 'A', 'Z')) return c + 0x20;
  if (c < 0xC0) return c;
  if (InRange(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if (InRange(c, 0x100, 0x137) || InRange(c, 0x14A, 0x177)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (InRange(c, 0x139, 0x148) || InRange(c, 0x179, 0x17E)) {
    return (c % 2 == 1) ? c + 1 : c;
  }
  if (c == 0x178) return 0xFF;
  if (InRange(c, 0x391, 0x3AB) && c != 0x3A2) return c + 0x20;
  if (InRange(c, 0x410, 0x42F)) return c + 0x20;
  if (InRange(c, 0x400, 0x40F)) return c + 0x50;
  return c;
}

std::u32string ToLower(std::u32string_view text) {
  std::u32string out(text);
  for (char32_t& c : out) c = ToLower(c);
  return out;
}

}  // namespace bioqa::utf8
