#ifndef BIOQA_METRICS_H_
#define BIOQA_METRICS_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/model.h"

namespace bioqa {

// Answer comparison mode. kNormalized lower-cases, collapses whitespace and
// strips punctuation from both ends; kStrict compares raw strings.
enum class AnswerMatching { kNormalized, kStrict };

std::string NormalizeAnswer(std::string_view answer);
bool AnswersEqual(std::string_view a, std::string_view b,
                  AnswerMatching matching = AnswerMatching::kNormalized);

struct YesNoScores {
  double accuracy = 0.0;
  double yes_f1 = 0.0;
  double no_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t count = 0;
};

struct FactoidScores {
  double strict_accuracy = 0.0;
  double lenient_accuracy = 0.0;
  double mrr = 0.0;
  std::size_t count = 0;
};

struct ListScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t count = 0;
};

struct MetricsReport {
  YesNoScores yesno;
  FactoidScores factoid;
  ListScores list;
  double macro_average = 0.0;
};

// Golds missing a prediction count as wrong. Prediction ids absent from the
// golds raise DataMismatch; empty golds raise InvalidArgument.
YesNoScores EvalYesNo(const std::map<std::string, bool>& predictions,
                      const std::map<std::string, bool>& golds);

// Ranked lists hold at most five candidates (InvalidArgument otherwise).
FactoidScores EvalFactoid(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, SynonymList>& golds,
    AnswerMatching matching = AnswerMatching::kNormalized);

// Per-question precision, recall and F1 averaged without weights. Each gold
// item is credited at most once, through a maximum matching between
// predictions and items; repeated predictions count against precision.
ListScores EvalList(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, std::vector<SynonymList>>& golds,
    AnswerMatching matching = AnswerMatching::kNormalized);

// Mean of yes/no macro F1, factoid MRR and list F1.
double MacroAverage(double yesno_macro_f1, double factoid_mrr, double list_f1);

// Single-question list scores; exposed for tests and for the harness.
ListScores ScoreListQuestion(std::span<const std::string> predictions,
                             std::span<const SynonymList> gold_items,
                             AnswerMatching matching);

}  // namespace bioqa

#endif  // BIOQA_METRICS_H_
