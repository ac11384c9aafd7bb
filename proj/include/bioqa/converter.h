#ifndef BIOQA_CONVERTER_H_
#define BIOQA_CONVERTER_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/format_io.h"
#include "bioqa/model.h"

namespace bioqa {

struct ContextStrategy {
  enum class Kind { kSnippetAsIs, kFullAbstract, kAppendedSnippet };

  Kind kind = Kind::kSnippetAsIs;
  // Neighbouring sentences added on each side; AppendedSnippet only.
  std::size_t window = 1;
  bool boundary_required = true;  // neighbours of a match must be non-alphanumeric

  static ContextStrategy SnippetAsIs() { return {Kind::kSnippetAsIs, 0}; }
  static ContextStrategy FullAbstract() { return {Kind::kFullAbstract, 0}; }
  static ContextStrategy AppendedSnippet(std::size_t window = 1) {
    return {Kind::kAppendedSnippet, window};
  }
};

std::string_view StrategyName(ContextStrategy::Kind kind);
// Accepts "snippet", "abstract" and "appended".
std::optional<ContextStrategy::Kind> ParseStrategy(std::string_view name);

struct ContextEntry {
  std::string text;
  std::string document_id;
  std::optional<std::size_t> snippet_index;  // unset for full abstracts
  bool fell_back = false;  // appended strategy without offsets or abstract
};

struct ContextSet {
  std::vector<ContextEntry> contexts;
  std::size_t fallbacks = 0;
};

// Every case-sensitive occurrence of `answer` in `context`, overlapping ones
// included, sorted by start. With boundary_required an occurrence survives
// only when the characters right before and after it (where they exist) are
// not alphanumeric. Empty answers never match.
std::vector<CharRange> FindExactRanges(std::u32string_view context,
                                       std::u32string_view answer,
                                       bool boundary_required);
std::vector<AnswerSpan> FindExactSpans(std::string_view context,
                                       std::string_view answer,
                                       bool boundary_required);

// Throws InvalidArgument for FullAbstract when no abstract is available.
ContextSet BuildContexts(const BioasqQuestion& question,
                         const ContextStrategy& strategy);

struct ConversionReport {
  std::size_t questions_seen = 0;
  std::size_t instances_emitted = 0;
  std::size_t spans_emitted = 0;
  std::size_t binary_instances_emitted = 0;
  std::size_t questions_skipped_no_match = 0;
  std::size_t yesno_without_snippets = 0;
  std::size_t appended_fallbacks = 0;
  std::size_t missing_abstracts = 0;
  std::size_t summary_skipped = 0;
  std::map<std::string, std::size_t> questions_by_type;
  std::map<std::string, std::size_t> instances_by_type;

  // Associative and commutative, so per-question reports can be merged in
  // any grouping.
  ConversionReport& operator+=(const ConversionReport& other);
  friend bool operator==(const ConversionReport&, const ConversionReport&) =
      default;
};

// One instance per (context, gold item) pair with at least one boundary-valid
// match. Its answers are all matches of all synonyms of that item in that
// context. Ids are "<question id>_<context index>_<item index>".
// Throws InvalidArgument for yes/no questions.
std::vector<SquadInstance> EnumerateQcaTriplets(
    const BioasqQuestion& question, const ContextStrategy& strategy,
    ConversionReport* report = nullptr);

// One instance per snippet, labelled with the gold yes/no answer. Ids are
// "<question id>_<snippet index>". Throws InvalidArgument when the label is
// missing or the question is not yes/no.
std::vector<BinaryInstance> ConvertYesNo(const BioasqQuestion& question,
                                         ConversionReport* report = nullptr);

struct ConversionResult {
  std::vector<SquadInstance> extractive;
  std::vector<std::string> titles;  // article title (question id) per instance
  std::vector<BinaryInstance> binary;
  ConversionReport report;
};

// Converts a whole dataset. Questions whose abstracts are missing under
// FullAbstract are skipped and counted rather than aborting the run.
ConversionResult ConvertDataset(std::span<const BioasqQuestion> questions,
                                const ContextStrategy& strategy);

struct FilterResult {
  SquadDataset dataset;
  std::size_t removed_count = 0;
};

// Drops every instance with an answer whose offsets do not reproduce its
// text, then any paragraph or article left empty.
FilterResult FilterUnmatchedSquad(const SquadDataset& dataset);

}  // namespace bioqa

#endif  // BIOQA_CONVERTER_H_
