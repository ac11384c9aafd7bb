#ifndef BIOQA_ANSWERABILITY_H_
#define BIOQA_ANSWERABILITY_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/model.h"

namespace bioqa {

// Why a gold answer is (not) extractable from the snippets. Categories are
// listed in the order the classifier tries them.
enum class MatchCategory {
  kExact,
  kLowercaseMatch,
  kWhitespaceVariant,
  kAdditionalPhrase,
  kNoMatch,
};

std::string_view MatchCategoryName(MatchCategory category);

// Ordered checks, first hit wins:
//   Exact             boundary-valid case-sensitive match of a synonym
//   LowercaseMatch    same after lower-casing both sides
//   WhitespaceVariant same after lower-casing and collapsing every Unicode
//                     whitespace run to one space (hyphens untouched)
//   AdditionalPhrase  a contiguous strict sub-phrase of a synonym covering at
//                     least half of its tokens matches as above
//   NoMatch           otherwise
// Throws InvalidArgument for an empty synonym list.
MatchCategory ClassifyMatch(const SynonymList& synonyms,
                            std::span<const Snippet> snippets);

struct Answerability {
  bool answerable = false;
  std::vector<MatchCategory> item_categories;
};

// Factoid: its item is Exact. List: every item is Exact.
// Throws InvalidArgument for yes/no questions.
Answerability QuestionAnswerable(const BioasqQuestion& question);

struct AuditCell {
  std::size_t unanswerable = 0;
  std::size_t total = 0;
  // One entry per unanswerable question; sums to `unanswerable`.
  std::map<MatchCategory, std::size_t> categories;

  AuditCell& operator+=(const AuditCell& other);
  friend bool operator==(const AuditCell&, const AuditCell&) = default;
};

struct AuditRow {
  std::string id;
  std::string batch;
  QuestionType type = QuestionType::kFactoid;
  bool answerable = false;
  // Earliest non-Exact category among the items of an unanswerable question.
  std::optional<MatchCategory> category;
  std::vector<MatchCategory> item_categories;
};

struct UnanswerableReport {
  std::map<std::string, std::map<QuestionType, AuditCell>> batches;
  std::map<QuestionType, AuditCell> totals;
  std::vector<AuditRow> rows;

  UnanswerableReport& operator+=(const UnanswerableReport& other);
};

inline constexpr std::string_view kUnassignedBatch = "unassigned";

// Audits factoid and list questions; yes/no questions are ignored. Questions
// without an entry in batch_labels land in kUnassignedBatch.
UnanswerableReport Audit(
    std::span<const BioasqQuestion> questions,
    const std::map<std::string, std::string>& batch_labels);

enum class Rounding { kHalfEven, kTruncate };

// Decimal rendering of numerator/denominator computed in exact integer
// arithmetic, e.g. FormatRate(18, 88, 3, kHalfEven) == "0.205" and
// FormatRate(18, 88, 3, kTruncate) == "0.204". A zero denominator renders as
// zero.
std::string FormatRate(std::size_t numerator, std::size_t denominator,
                       int decimals, Rounding rounding);

}  // namespace bioqa

#endif  // BIOQA_ANSWERABILITY_H_
