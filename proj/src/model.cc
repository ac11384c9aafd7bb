#include "bioqa/model.h"

#include <unordered_map>

#include "bioqa/utf8.h"

namespace bioqa {

std::string_view QuestionTypeName(QuestionType type) {
  switch (type) {
    case QuestionType::kYesNo:
      return "yesno";
    case QuestionType::kFactoid:
      return "factoid";
    case QuestionType::kList:
      return "list";
  }
  return "unknown";
}

std::optional<QuestionType> ParseQuestionType(std::string_view name) {
  if (name == "yesno") return QuestionType::kYesNo;
  if (name == "factoid") return QuestionType::kFactoid;
  if (name == "list") return QuestionType::kList;
  return std::nullopt;
}

bool SpanMatchesContext(std::u32string_view context, const AnswerSpan& span) {
  if (span.start_char >= span.end_char || span.end_char > context.size()) {
    return false;
  }
  return utf8::Encode(context.substr(span.start_char,
                                     span.end_char - span.start_char)) ==
         span.text;
}

bool SpanMatchesContext(std::string_view context, const AnswerSpan& span) {
  return SpanMatchesContext(utf8::Decode(context), span);
}

bool InstanceOffsetsValid(const SquadInstance& instance) {
  const std::u32string context = utf8::Decode(instance.context);
  for (const AnswerSpan& span : instance.answers) {
    if (!SpanMatchesContext(context, span)) return false;
  }
  return true;
}

std::vector<Violation> ValidateDataset(
    std::span<const BioasqQuestion> questions) {
  std::vector<Violation> out;
  std::unordered_map<std::string, std::size_t> first_index;

  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    const BioasqQuestion& q = questions[qi];
    auto add = [&](std::string message) {
      out.push_back({q.id, std::move(message)});
    };

    if (q.id.empty()) add("question id must be non-empty");
    auto [it, inserted] = first_index.emplace(q.id, qi);
    if (!inserted) {
      add("duplicate id '" + q.id + "' at records " +
          std::to_string(it->second) + " and " + std::to_string(qi));
    }

    switch (q.type) {
      case QuestionType::kYesNo:
        if (!q.gold.yes_label) add("YesNo must have a yes/no label");
        if (!q.gold.items.empty()) add("YesNo must not have answer items");
        break;
      case QuestionType::kFactoid:
        if (q.gold.yes_label) add("Factoid must not have a yes/no label");
        if (q.gold.items.size() != 1) {
          add("Factoid must have exactly one item");
        }
        break;
      case QuestionType::kList:
        if (q.gold.yes_label) add("List must not have a yes/no label");
        if (q.gold.items.empty()) add("List must have at least one item");
        break;
    }

    for (std::size_t i = 0; i < q.gold.items.size(); ++i) {
      const SynonymList& item = q.gold.items[i];
      if (item.empty()) {
        add("gold item " + std::to_string(i) + " has no synonyms");
      }
      for (const std::string& synonym : item) {
        if (synonym.empty()) {
          add("gold item " + std::to_string(i) + " has an empty synonym");
        }
      }
    }

    for (std::size_t s = 0; s < q.snippets.size(); ++s) {
      const Snippet& snippet = q.snippets[s];
      if (snippet.text.empty()) {
        add("snippet " + std::to_string(s) + " has empty text");
      }
      if (snippet.source_offsets &&
          snippet.source_offsets->end <= snippet.source_offsets->begin) {
        add("snippet " + std::to_string(s) + " offsets must satisfy end > begin");
      }
    }
  }
  return out;
}

}  // namespace bioqa
