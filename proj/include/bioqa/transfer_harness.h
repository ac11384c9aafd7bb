#ifndef BIOQA_TRANSFER_HARNESS_H_
#define BIOQA_TRANSFER_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/metrics.h"
#include "bioqa/model.h"
#include "bioqa/neural_heads.h"
#include "bioqa/toy_encoder.h"

namespace bioqa {

enum class TaskKind { kPairClassification, kBinaryYesNo, kSpanExtraction };

std::string_view TaskKindName(TaskKind kind);
std::optional<TaskKind> ParseTaskKind(std::string_view name);

// kFresh zero-initializes the task head at stage start; kReuse keeps the head
// left by an earlier stage of the same head shape.
enum class HeadPolicy { kFresh, kReuse };

struct StageData {
  std::vector<BinaryInstance> binary;
  std::vector<SquadInstance> spans;
};

struct TrainingStage {
  std::string name;
  TaskKind kind = TaskKind::kPairClassification;
  StageData data;
  std::string data_ref;  // where the data came from, for logs
  std::size_t epochs = 1;
  double learning_rate = 1e-2;
  std::size_t batch_size = 12;
  std::uint64_t seed = 0;
  HeadPolicy head_policy = HeadPolicy::kFresh;
};

struct TransferPlan {
  ToyEncoderConfig encoder;
  std::vector<TrainingStage> stages;
};

struct ToyModel {
  ToyEncoder encoder;
  std::optional<YesNoHead> binary_head;
  std::optional<SpanHead> span_head;
};

struct StageLog {
  std::string name;
  TaskKind kind = TaskKind::kPairClassification;
  std::string start_checksum;
  std::string end_checksum;
  // Full-data mean loss; entry 0 is measured before the first update, entry e
  // after epoch e.
  std::vector<double> epoch_losses;
  std::size_t examples = 0;
  std::size_t skipped = 0;  // span instances with no token-aligned answer
};

// Mini-batch gradient descent on the stage loss (binary cross entropy for the
// classification kinds, span negative log-likelihood otherwise). Encoder
// parameters carry over; the head follows the stage's HeadPolicy.
// Throws InvalidArgument when the data does not fit the task kind or the
// hyperparameters are invalid.
StageLog TrainStage(ToyModel& model, const TrainingStage& stage);

struct EvalSets {
  std::vector<BinaryInstance> yesno;
  std::vector<SquadInstance> factoid;
  std::vector<SquadInstance> list;
};

struct PlanResult {
  std::vector<StageLog> stages;
  MetricsReport metrics;
  std::string final_checksum;
};

// Runs the stages in order on a freshly initialized encoder and evaluates the
// final model. A stage failure is rethrown with the stage name attached.
PlanResult RunPlan(const TransferPlan& plan, const EvalSets& eval_sets);

// Evaluation only; heads that were never trained are skipped.
MetricsReport EvaluateModel(const ToyModel& model, const EvalSets& eval_sets);

// Top-k answer strings of the span head for one instance.
std::vector<std::string> PredictSpans(const ToyModel& model,
                                      const SquadInstance& instance,
                                      std::size_t k = kDefaultTopK);

// Deterministic toy corpora. Pairs and yes/no are linearly separable by a
// cue word; span answers are gene-like symbols inside filler text.
std::vector<BinaryInstance> SyntheticPairs(std::size_t count, std::uint64_t seed);
std::vector<BinaryInstance> SyntheticYesNo(std::size_t count, std::uint64_t seed);
std::vector<SquadInstance> SyntheticSpans(std::size_t count, std::uint64_t seed);

// Plan JSON:
//   {"encoder": {"buckets", "hidden_size", "ngram", "seed"},
//    "stages": [{"name", "task", "epochs", "learning_rate", "batch_size",
//                "seed", "head_policy", "data": <source>}],
//    "eval": {"yesno": <source>, "factoid": <source>}}
// A source is a path (resolved against base_dir) to a BioASQ, SQuAD or
// binary-instance JSON file, or {"synthetic": "pairs|yesno|spans",
// "count": N, "seed": S}.
struct PlanFile {
  TransferPlan plan;
  EvalSets eval;
};
PlanFile ParsePlan(std::string_view json, const std::string& base_dir);

}  // namespace bioqa

#endif  // BIOQA_TRANSFER_HARNESS_H_
