#ifndef BIOQA_FORMAT_IO_H_
#define BIOQA_FORMAT_IO_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/model.h"

namespace bioqa {

struct SquadParagraph {
  std::string context;
  // Every entry carries the paragraph context in its own context field.
  std::vector<SquadInstance> qas;

  friend bool operator==(const SquadParagraph&, const SquadParagraph&) =
      default;
};

struct SquadArticle {
  std::string title;
  std::vector<SquadParagraph> paragraphs;

  friend bool operator==(const SquadArticle&, const SquadArticle&) = default;
};

struct SquadDataset {
  std::string version = "v1.1";
  std::vector<SquadArticle> articles;

  friend bool operator==(const SquadDataset&, const SquadDataset&) = default;
};

struct ParsedBioasq {
  std::vector<BioasqQuestion> questions;
  std::size_t summary_skipped = 0;
};

struct ParsedSquad {
  SquadDataset dataset;
  // Ids of instances whose answer offsets do not reproduce the answer text.
  // They stay in the dataset; FilterUnmatchedSquad removes them explicitly.
  std::vector<std::string> flagged_ids;
};

// Predictions grouped by question type. Factoid lists keep their rank order.
struct PredictionFile {
  std::map<std::string, bool> yesno;
  std::map<std::string, std::vector<std::string>> factoid;
  std::map<std::string, std::vector<std::string>> list;

  friend bool operator==(const PredictionFile&, const PredictionFile&) =
      default;
};

inline constexpr std::size_t kMaxFactoidCandidates = 5;

// Reads a BioASQ JSON document: {"questions": [{"id", "body", "type",
// "exact_answer", "snippets": [...]}]}. Summary questions are counted and
// skipped. Factoid and list exact answers are accepted both as a flat list of
// strings and as a list of synonym lists.
//
// Abstract text is not part of the official schema; it is read from an
// optional "abstracts" object (document id -> text), either per question or at
// top level.
ParsedBioasq ParseBioasq(std::string_view json);
std::string WriteBioasq(std::span<const BioasqQuestion> questions);

ParsedSquad ParseSquad(std::string_view json);

// Compact UTF-8 JSON, keys in SQuAD order, terminated by a newline.
std::string WriteSquad(const SquadDataset& dataset);

// Prediction files come in three shapes:
//   {"yesno": {id: "yes"}, "factoid": {id: [...]}, "list": {id: [...]}}
//   {"questions": [{"id", "type", "exact_answer"}]}   (BioASQ submission)
//   {id: value}                                       (flat)
// Arrays in the flat shape, and submission entries without "type", are typed
// through `types` (usually built from the golden file).
PredictionFile ParsePredictions(
    std::string_view json,
    const std::map<std::string, QuestionType>* types = nullptr);
std::string WritePredictions(const PredictionFile& predictions);

// All instances of a dataset in document order.
std::vector<SquadInstance> FlattenInstances(const SquadDataset& dataset);

// Packs instances into a dataset. titles[i] names the article of instance i;
// consecutive instances with the same title share an article and consecutive
// instances with the same context share a paragraph.
SquadDataset PackInstances(std::span<const SquadInstance> instances,
                           std::span<const std::string> titles);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace bioqa

#endif  // BIOQA_FORMAT_IO_H_
