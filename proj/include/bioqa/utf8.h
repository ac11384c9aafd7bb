#ifndef BIOQA_UTF8_H_
#define BIOQA_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

// Character-level helpers. All offsets exposed by the toolkit count Unicode
// scalar values, so text is decoded to UTF-32 before any index arithmetic.
namespace bioqa::utf8 {

// Invalid byte sequences decode to U+FFFD.
std::u32string Decode(std::string_view text);
std::string Encode(std::u32string_view text);

std::size_t Length(std::string_view text);

// Characters [begin, end) of a UTF-8 string. Indices are clamped.
std::string Slice(std::string_view text, std::size_t begin, std::size_t end);

// Unicode White_Space property.
bool IsSpace(char32_t c);

// Letters and digits. Non-ASCII code points count as alphanumeric unless they
// fall in a known punctuation, symbol or space block, so Greek letters and
// micro signs inside entity names behave like word characters.
bool IsAlnum(char32_t c);

bool IsAsciiUpper(char32_t c);
bool IsDigit(char32_t c);

// Simple one-to-one lower-case mapping for Latin, Greek and Cyrillic. Length
// preserving, so offsets computed on folded text are valid on the original.
char32_t ToLower(char32_t c);
std::u32string ToLower(std::u32string_view text);

}  // namespace bioqa::utf8

#endif  // BIOQA_UTF8_H_
