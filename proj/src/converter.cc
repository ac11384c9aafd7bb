#include "bioqa/converter.h"

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>

#include "bioqa/context_tools.h"
#include "bioqa/error.h"
#include "bioqa/utf8.h"

namespace bioqa {

std::string_view StrategyName(ContextStrategy::Kind kind) {
  switch (kind) {
    case ContextStrategy::Kind::kSnippetAsIs:
      return "snippet";
    case ContextStrategy::Kind::kFullAbstract:
      return "abstract";
    case ContextStrategy::Kind::kAppendedSnippet:
      return "appended";
  }
  return "unknown";
}

std::optional<ContextStrategy::Kind> ParseStrategy(std::string_view name) {
  if (name == "snippet") return ContextStrategy::Kind::kSnippetAsIs;
  if (name == "abstract") return ContextStrategy::Kind::kFullAbstract;
  if (name == "appended") return ContextStrategy::Kind::kAppendedSnippet;
  return std::nullopt;
}

std::vector<CharRange> FindExactRanges(std::u32string_view context,
                                       std::u32string_view answer,
                                       bool boundary_required) {
  std::vector<CharRange> out;
  if (answer.empty() || answer.size() > context.size()) return out;
  const std::size_t m = answer.size();
  for (std::size_t pos = context.find(answer); pos != std::u32string_view::npos;
       pos = context.find(answer, pos + 1)) {
    if (boundary_required) {
      const bool left_ok = pos == 0 || !utf8::IsAlnum(context[pos - 1]);
      const bool right_ok =
          pos + m == context.size() || !utf8::IsAlnum(context[pos + m]);
      if (!left_ok || !right_ok) continue;
    }
    out.push_back({pos, pos + m});
  }
  return out;
}

std::vector<AnswerSpan> FindExactSpans(std::string_view context,
                                       std::string_view answer,
                                       bool boundary_required) {
  std::vector<AnswerSpan> out;
  for (const CharRange& r : FindExactRanges(
           utf8::Decode(context), utf8::Decode(answer), boundary_required)) {
    out.push_back({r.begin, r.end, std::string(answer)});
  }
  return out;
}

namespace {

// Snippet widened by `window` sentences on each side inside its abstract, or
// nullopt when the abstract or offsets are unusable.
std::optional<std::string> AppendNeighbours(const BioasqQuestion& question,
                                            const Snippet& snippet,
                                            std::size_t window) {
  if (!snippet.source_offsets) return std::nullopt;
  auto it = question.abstracts.find(snippet.document_id);
  if (it == question.abstracts.end()) return std::nullopt;
  const std::u32string abstract = utf8::Decode(it->second);
  const CharRange range = *snippet.source_offsets;
  if (range.end > abstract.size() || range.begin >= range.end) {
    return std::nullopt;
  }
  const std::u32string_view view(abstract);
  if (utf8::Encode(view.substr(range.begin, range.end - range.begin)) !=
      snippet.text) {
    return std::nullopt;
  }
  if (window == 0) return snippet.text;

  const std::vector<SentenceSpan> sentences = SegmentSentences(view);
  if (sentences.empty()) return snippet.text;
  std::size_t first = 0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (sentences[k].begin <= range.begin) first = k;
    if (sentences[k].begin < range.end) last = k;
  }
  first = first >= window ? first - window : 0;
  last = std::min(last + window, sentences.size() - 1);
  const std::size_t begin = std::min(sentences[first].begin, range.begin);
  const std::size_t end = std::max(sentences[last].end, range.end);
  return utf8::Encode(view.substr(begin, end - begin));
}

}  // namespace

ContextSet BuildContexts(const BioasqQuestion& question,
                         const ContextStrategy& strategy) {
  ContextSet out;
  switch (strategy.kind) {
    case ContextStrategy::Kind::kSnippetAsIs:
      for (std::size_t i = 0; i < question.snippets.size(); ++i) {
        const Snippet& s = question.snippets[i];
        out.contexts.push_back({s.text, s.document_id, i, false});
      }
      break;
    case ContextStrategy::Kind::kFullAbstract: {
      std::set<std::string> seen;
      for (const Snippet& s : question.snippets) {
        auto it = question.abstracts.find(s.document_id);
        if (it == question.abstracts.end() || !seen.insert(it->first).second) {
          continue;
        }
        out.contexts.push_back({it->second, it->first, std::nullopt, false});
      }
      for (const auto& [doc, text] : question.abstracts) {
        if (seen.insert(doc).second) {
          out.contexts.push_back({text, doc, std::nullopt, false});
        }
      }
      if (out.contexts.empty()) {
        throw InvalidArgument("question '" + question.id +
                              "' has no abstracts for the abstract strategy");
      }
      break;
    }
    case ContextStrategy::Kind::kAppendedSnippet:
      for (std::size_t i = 0; i < question.snippets.size(); ++i) {
        const Snippet& s = question.snippets[i];
        if (auto widened = AppendNeighbours(question, s, strategy.window)) {
          out.contexts.push_back({std::move(*widened), s.document_id, i, false});
        } else {
          out.contexts.push_back({s.text, s.document_id, i, true});
          ++out.fallbacks;
        }
      }
      break;
  }
  return out;
}

ConversionReport& ConversionReport::operator+=(const ConversionReport& other) {
  questions_seen += other.questions_seen;
  instances_emitted += other.instances_emitted;
  spans_emitted += other.spans_emitted;
  binary_instances_emitted += other.binary_instances_emitted;
  questions_skipped_no_match += other.questions_skipped_no_match;
  yesno_without_snippets += other.yesno_without_snippets;
  appended_fallbacks += other.appended_fallbacks;
  missing_abstracts += other.missing_abstracts;
  summary_skipped += other.summary_skipped;
  for (const auto& [k, v] : other.questions_by_type) questions_by_type[k] += v;
  for (const auto& [k, v] : other.instances_by_type) instances_by_type[k] += v;
  return *this;
}

std::vector<SquadInstance> EnumerateQcaTriplets(
    const BioasqQuestion& question, const ContextStrategy& strategy,
    ConversionReport* report) {
  if (question.type == QuestionType::kYesNo) {
    throw InvalidArgument("question '" + question.id +
                          "' is yes/no; span extraction needs factoid or list");
  }
  const ContextSet contexts = BuildContexts(question, strategy);

  std::vector<std::vector<std::u32string>> items;
  for (const SynonymList& item : question.gold.items) {
    std::vector<std::u32string> decoded;
    for (const std::string& s : item) decoded.push_back(utf8::Decode(s));
    items.push_back(std::move(decoded));
  }

  std::vector<SquadInstance> out;
  std::size_t spans = 0;
  for (std::size_t c = 0; c < contexts.contexts.size(); ++c) {
    const std::string& text = contexts.contexts[c].text;
    const std::u32string context = utf8::Decode(text);
    for (std::size_t i = 0; i < items.size(); ++i) {
      std::vector<AnswerSpan> answers;
      for (std::size_t s = 0; s < items[i].size(); ++s) {
        for (const CharRange& r : FindExactRanges(context, items[i][s], strategy.boundary_required)) {
          answers.push_back({r.begin, r.end, question.gold.items[i][s]});
        }
      }
      if (answers.empty()) continue;
      std::sort(answers.begin(), answers.end(),
                [](const AnswerSpan& a, const AnswerSpan& b) {
                  return std::tie(a.start_char, a.end_char) <
                         std::tie(b.start_char, b.end_char);
                });
      answers.erase(std::unique(answers.begin(), answers.end(),
                                [](const AnswerSpan& a, const AnswerSpan& b) {
                                  return a.start_char == b.start_char &&
                                         a.end_char == b.end_char;
                                }),
                    answers.end());
      spans += answers.size();
      out.push_back({question.id + "_" + std::to_string(c) + "_" +
                         std::to_string(i),
                     question.body, text, std::move(answers)});
    }
  }

  if (report != nullptr) {
    const std::string type(QuestionTypeName(question.type));
    report->questions_seen += 1;
    report->questions_by_type[type] += 1;
    report->instances_emitted += out.size();
    report->instances_by_type[type] += out.size();
    report->spans_emitted += spans;
    report->appended_fallbacks += contexts.fallbacks;
    if (out.empty()) report->questions_skipped_no_match += 1;
  }
  return out;
}

std::vector<BinaryInstance> ConvertYesNo(const BioasqQuestion& question,
                                         ConversionReport* report) {
  if (question.type != QuestionType::kYesNo) {
    throw InvalidArgument("question '" + question.id + "' is not yes/no");
  }
  if (!question.gold.yes_label) {
    throw InvalidArgument("yes/no question '" + question.id +
                          "' has no gold label");
  }
  std::vector<BinaryInstance> out;
  for (std::size_t i = 0; i < question.snippets.size(); ++i) {
    out.push_back({question.id + "_" + std::to_string(i), question.body,
                   question.snippets[i].text, *question.gold.yes_label});
  }
  if (report != nullptr) {
    report->questions_seen += 1;
    report->questions_by_type["yesno"] += 1;
    report->binary_instances_emitted += out.size();
    report->instances_by_type["yesno"] += out.size();
    if (out.empty()) report->yesno_without_snippets += 1;
  }
  return out;
}

ConversionResult ConvertDataset(std::span<const BioasqQuestion> questions,
                                const ContextStrategy& strategy) {
  ConversionResult result;
  for (const BioasqQuestion& q : questions) {
    if (q.type == QuestionType::kYesNo) {
      for (BinaryInstance& b : ConvertYesNo(q, &result.report)) {
        result.binary.push_back(std::move(b));
      }
      continue;
    }
    std::vector<SquadInstance> instances;
    try {
      instances = EnumerateQcaTriplets(q, strategy, &result.report);
    } catch (const InvalidArgument&) {
      const std::string type(QuestionTypeName(q.type));
      result.report.questions_seen += 1;
      result.report.questions_by_type[type] += 1;
      result.report.missing_abstracts += 1;
      result.report.questions_skipped_no_match += 1;
      continue;
    }
    for (SquadInstance& instance : instances) {
      result.titles.push_back(q.id);
      result.extractive.push_back(std::move(instance));
    }
  }
  return result;
}

FilterResult FilterUnmatchedSquad(const SquadDataset& dataset) {
  FilterResult result;
  result.dataset.version = dataset.version;
  for (const SquadArticle& article : dataset.articles) {
    SquadArticle kept{article.title, {}};
    for (const SquadParagraph& paragraph : article.paragraphs) {
      SquadParagraph p{paragraph.context, {}};
      for (const SquadInstance& qa : paragraph.qas) {
        if (InstanceOffsetsValid(qa)) {
          p.qas.push_back(qa);
        } else {
          ++result.removed_count;
        }
      }
      if (!p.qas.empty()) kept.paragraphs.push_back(std::move(p));
    }
    if (!kept.paragraphs.empty()) result.dataset.articles.push_back(std::move(kept));
  }
  return result;
}

}  // namespace bioqa
