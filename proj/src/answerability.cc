#include "bioqa/answerability.h"

#include <algorithm>

#include "bioqa/converter.h"
#include "bioqa/error.h"
#include "bioqa/utf8.h"

namespace bioqa {

namespace {

std::u32string CollapseWhitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char32_t c : text) {
    if (utf8::IsSpace(c)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

std::u32string Trim(std::u32string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && text[b] == U' ') ++b;
  while (e > b && text[e - 1] == U' ') --e;
  return std::u32string(text.substr(b, e - b));
}

bool AnyMatch(std::span<const std::u32string> haystacks,
              std::u32string_view needle) {
  return std::any_of(haystacks.begin(), haystacks.end(),
                     [&](const std::u32string& h) {
                       return !FindExactRanges(h, needle, true).empty();
                     });
}

std::vector<std::u32string> SplitOnSpace(std::u32string_view text) {
  std::vector<std::u32string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == U' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != U' ') ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace

std::string_view MatchCategoryName(MatchCategory category) {
  switch (category) {
    case MatchCategory::kExact:
      return "exact";
    case MatchCategory::kLowercaseMatch:
      return "lowercase_match";
    case MatchCategory::kWhitespaceVariant:
      return "whitespace_variant";
    case MatchCategory::kAdditionalPhrase:
      return "additional_phrase";
    case MatchCategory::kNoMatch:
      return "no_match";
  }
  return "unknown";
}

MatchCategory ClassifyMatch(const SynonymList& synonyms,
                            std::span<const Snippet> snippets) {
  if (synonyms.empty()) {
    throw InvalidArgument("ClassifyMatch needs at least one synonym");
  }
  std::vector<std::u32string> raw;
  std::vector<std::u32string> lower;
  std::vector<std::u32string> collapsed;
  for (const Snippet& s : snippets) {
    raw.push_back(utf8::Decode(s.text));
    lower.push_back(utf8::ToLower(raw.back()));
    collapsed.push_back(CollapseWhitespace(lower.back()));
  }
  std::vector<std::u32string> syn_raw;
  for (const std::string& s : synonyms) syn_raw.push_back(utf8::Decode(s));

  for (const auto& syn : syn_raw) {
    if (AnyMatch(raw, syn)) return MatchCategory::kExact;
  }
  for (const auto& syn : syn_raw) {
    if (AnyMatch(lower, utf8::ToLower(syn))) {
      return MatchCategory::kLowercaseMatch;
    }
  }
  std::vector<std::u32string> syn_collapsed;
  for (const auto& syn : syn_raw) {
    syn_collapsed.push_back(Trim(CollapseWhitespace(utf8::ToLower(syn))));
  }
  for (const auto& syn : syn_collapsed) {
    if (AnyMatch(collapsed, syn)) return MatchCategory::kWhitespaceVariant;
  }
  for (const auto& syn : syn_collapsed) {
    const std::vector<std::u32string> tokens = SplitOnSpace(syn);
    const std::size_t n = tokens.size();
    const std::size_t min_len = (n + 1) / 2;
    for (std::size_t len = n - 1; len >= std::max<std::size_t>(min_len, 1) &&
                                  len < n;
         --len) {
      for (std::size_t start = 0; start + len <= n; ++start) {
        std::u32string phrase = tokens[start];
        for (std::size_t k = start + 1; k < start + len; ++k) {
          phrase += U' ';
          phrase += tokens[k];
        }
        if (AnyMatch(collapsed, phrase)) return MatchCategory::kAdditionalPhrase;
      }
    }
  }
  return MatchCategory::kNoMatch;
}

Answerability QuestionAnswerable(const BioasqQuestion& question) {
  if (question.type == QuestionType::kYesNo) {
    throw InvalidArgument("question '" + question.id +
                          "' is yes/no and has no extractive answer");
  }
  Answerability out;
  out.answerable = !question.gold.items.empty();
  for (const SynonymList& item : question.gold.items) {
    const MatchCategory category =
        item.empty() ? MatchCategory::kNoMatch
                     : ClassifyMatch(item, question.snippets);
    out.item_categories.push_back(category);
    out.answerable = out.answerable && category == MatchCategory::kExact;
  }
  return out;
}

AuditCell& AuditCell::operator+=(const AuditCell& other) {
  unanswerable += other.unanswerable;
  total += other.total;
  for (const auto& [k, v] : other.categories) categories[k] += v;
  return *this;
}

UnanswerableReport& UnanswerableReport::operator+=(
    const UnanswerableReport& other) {
  for (const auto& [batch, cells] : other.batches) {
    for (const auto& [type, cell] : cells) batches[batch][type] += cell;
  }
  for (const auto& [type, cell] : other.totals) totals[type] += cell;
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  return *this;
}

UnanswerableReport Audit(
    std::span<const BioasqQuestion> questions,
    const std::map<std::string, std::string>& batch_labels) {
  UnanswerableReport report;
  for (const BioasqQuestion& q : questions) {
    if (q.type == QuestionType::kYesNo) continue;
    AuditRow row;
    row.id = q.id;
    auto it = batch_labels.find(q.id);
    row.batch = it != batch_labels.end() ? it->second
                                         : std::string(kUnassignedBatch);
    row.type = q.type;
    const Answerability a = QuestionAnswerable(q);
    row.answerable = a.answerable;
    row.item_categories = a.item_categories;

    AuditCell cell;
    cell.total = 1;
    if (!a.answerable) {
      cell.unanswerable = 1;
      MatchCategory earliest = MatchCategory::kNoMatch;
      for (MatchCategory c : a.item_categories) {
        if (c != MatchCategory::kExact) earliest = std::min(earliest, c);
      }
      row.category = earliest;
      cell.categories[earliest] = 1;
    }
    report.batches[row.batch][q.type] += cell;
    report.totals[q.type] += cell;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string FormatRate(std::size_t numerator, std::size_t denominator,
                       int decimals, Rounding rounding) {
  unsigned long long scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  unsigned long long scaled = 0;
  if (denominator != 0) {
    const unsigned long long top =
        static_cast<unsigned long long>(numerator) * scale;
    scaled = top / denominator;
    const unsigned long long remainder = top % denominator;
    if (rounding == Rounding::kHalfEven) {
      const unsigned long long twice = 2 * remainder;
      if (twice > denominator || (twice == denominator && scaled % 2 == 1)) {
        ++scaled;
      }
    }
  }
  std::string digits = std::to_string(scaled % scale);
  if (static_cast<int>(digits.size()) < decimals) {
    digits.insert(0, static_cast<std::size_t>(decimals) - digits.size(), '0');
  }
  std::string out = std::to_string(scaled / scale);
  if (decimals > 0) out += "." + digits;
  return out;
}

}  // namespace bioqa
