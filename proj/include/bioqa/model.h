#ifndef BIOQA_MODEL_H_
#define BIOQA_MODEL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bioqa {

// Summary questions are not representable; parsers drop them.
enum class QuestionType { kYesNo, kFactoid, kList };

std::string_view QuestionTypeName(QuestionType type);
std::optional<QuestionType> ParseQuestionType(std::string_view name);

// Half-open character range [begin, end).
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const CharRange&, const CharRange&) = default;
};

struct Snippet {
  std::string text;
  std::string document_id;
  // Offsets of the snippet inside the abstract of document_id, when known.
  std::optional<CharRange> source_offsets;

  friend bool operator==(const Snippet&, const Snippet&) = default;
};

// One gold answer entity with all of its accepted surface forms.
using SynonymList = std::vector<std::string>;

struct GoldAnswer {
  std::optional<bool> yes_label;  // yes/no questions only
  std::vector<SynonymList> items;

  friend bool operator==(const GoldAnswer&, const GoldAnswer&) = default;
};

struct BioasqQuestion {
  std::string id;
  std::string body;
  QuestionType type = QuestionType::kFactoid;
  GoldAnswer gold;
  std::vector<Snippet> snippets;
  std::map<std::string, std::string> abstracts;  // document id -> text

  friend bool operator==(const BioasqQuestion&, const BioasqQuestion&) =
      default;
};

struct AnswerSpan {
  std::size_t start_char = 0;
  std::size_t end_char = 0;  // exclusive
  std::string text;

  friend bool operator==(const AnswerSpan&, const AnswerSpan&) = default;
};

struct SquadInstance {
  std::string id;
  std::string question;
  std::string context;
  std::vector<AnswerSpan> answers;

  friend bool operator==(const SquadInstance&, const SquadInstance&) = default;
};

struct BinaryInstance {
  std::string id;
  std::string question;
  std::string context;
  bool label = false;  // true = yes

  friend bool operator==(const BinaryInstance&, const BinaryInstance&) =
      default;
};

// True when context[start_char, end_char) is exactly span.text and the range
// is well formed.
bool SpanMatchesContext(std::string_view context, const AnswerSpan& span);
bool SpanMatchesContext(std::u32string_view context, const AnswerSpan& span);

// True when every answer of the instance passes SpanMatchesContext.
bool InstanceOffsetsValid(const SquadInstance& instance);

struct Violation {
  std::string question_id;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Checks every structural invariant of the question model. An empty result
// means the dataset is well formed.
std::vector<Violation> ValidateDataset(std::span<const BioasqQuestion> questions);

}  // namespace bioqa

#endif  // BIOQA_MODEL_H_
