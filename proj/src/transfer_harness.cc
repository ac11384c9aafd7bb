#include "bioqa/transfer_harness.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "bioqa/converter.h"
#include "bioqa/error.h"
#include "bioqa/format_io.h"
#include "bioqa/utf8.h"
#include "json.hpp"

namespace bioqa {

namespace {

struct Example {
  const BinaryInstance* binary = nullptr;
  const SquadInstance* span = nullptr;
  GoldSpan gold;
};

bool IsBinaryKind(TaskKind kind) { return kind != TaskKind::kSpanExtraction; }

// Token index of the first answer's first and last character, if both land
// on context tokens.
std::optional<GoldSpan> AlignAnswer(const SquadInstance& instance) {
  if (instance.answers.empty()) return std::nullopt;
  const AnswerSpan& answer = instance.answers.front();
  if (answer.end_char <= answer.start_char) return std::nullopt;
  const std::size_t offset = Tokenize(instance.question).size() + 2;
  const std::vector<Token> tokens = Tokenize(instance.context);
  std::optional<std::size_t> first, last;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const CharRange r = tokens[k].range;
    if (r.begin <= answer.start_char && answer.start_char < r.end) first = k;
    if (r.begin <= answer.end_char - 1 && answer.end_char - 1 < r.end) last = k;
  }
  if (!first || !last || *last < *first) return std::nullopt;
  return GoldSpan{offset + *first, offset + *last};
}

void CheckStage(const TrainingStage& stage) {
  if (stage.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (!std::isfinite(stage.learning_rate) || stage.learning_rate < 0.0) {
    throw InvalidArgument("learning rate must be finite and non-negative");
  }
  if (stage.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (IsBinaryKind(stage.kind) && stage.data.binary.empty()) {
    throw InvalidArgument("task " + std::string(TaskKindName(stage.kind)) +
                          " needs binary instances");
  }
  if (!IsBinaryKind(stage.kind) && stage.data.spans.empty()) {
    throw InvalidArgument("task span needs extractive instances");
  }
}

struct HeadGrads {
  YesNoHead binary;
  SpanHead span;
};

// Loss of one example; gradients accumulate when `grads` is set.
double ExampleLoss(const ToyModel& model, const Example& ex, double scale,
                   EncoderGradients* grads, HeadGrads* head_grads) {
  const bool binary = ex.binary != nullptr;
  const std::string& question = binary ? ex.binary->question : ex.span->question;
  const std::string& context = binary ? ex.binary->context : ex.span->context;
  if (grads == nullptr) {
    const HiddenStates h = model.encoder.Encode(question, context);
    return binary ? YesNoLossAndGradient(h, *model.binary_head, ex.binary->label,
                                         0.0, nullptr, nullptr)
                  : SpanLossAndGradient(h, *model.span_head, ex.gold, 0.0,
                                        nullptr, nullptr);
  }
  const ToyEncoder::Trace trace = model.encoder.Forward(question, context);
  Matrix hidden_grad(trace.output.length(), trace.output.hidden_size());
  const double loss =
      binary ? YesNoLossAndGradient(trace.output, *model.binary_head,
                                    ex.binary->label, scale,
                                    &head_grads->binary, &hidden_grad)
             : SpanLossAndGradient(trace.output, *model.span_head, ex.gold,
                                   scale, &head_grads->span, &hidden_grad);
  model.encoder.Backward(trace, hidden_grad, grads);
  return loss;
}

double MeanLoss(const ToyModel& model, const std::vector<Example>& examples) {
  double sum = 0.0;
  for (const Example& ex : examples) {
    sum += ExampleLoss(model, ex, 0.0, nullptr, nullptr);
  }
  return sum / static_cast<double>(examples.size());
}

}  // namespace

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kPairClassification:
      return "pair";
    case TaskKind::kBinaryYesNo:
      return "yesno";
    case TaskKind::kSpanExtraction:
      return "span";
  }
  return "unknown";
}

std::optional<TaskKind> ParseTaskKind(std::string_view name) {
  if (name == "pair") return TaskKind::kPairClassification;
  if (name == "yesno") return TaskKind::kBinaryYesNo;
  if (name == "span") return TaskKind::kSpanExtraction;
  return std::nullopt;
}

StageLog TrainStage(ToyModel& model, const TrainingStage& stage) {
  CheckStage(stage);
  const std::size_t width = model.encoder.hidden_size();
  StageLog log;
  log.name = stage.name;
  log.kind = stage.kind;
  log.start_checksum = model.encoder.Checksum();

  std::vector<Example> examples;
  if (IsBinaryKind(stage.kind)) {
    if (stage.head_policy == HeadPolicy::kFresh || !model.binary_head) {
      model.binary_head = YesNoHead::Zero(width);
    }
    for (const BinaryInstance& b : stage.data.binary) {
      examples.push_back({&b, nullptr, {}});
    }
  } else {
    if (stage.head_policy == HeadPolicy::kFresh || !model.span_head) {
      model.span_head = SpanHead::Zero(width);
    }
    for (const SquadInstance& s : stage.data.spans) {
      if (auto gold = AlignAnswer(s)) {
        examples.push_back({nullptr, &s, *gold});
      } else {
        ++log.skipped;
      }
    }
    if (examples.empty()) {
      throw InvalidArgument("no span instance aligns with context tokens");
    }
  }
  log.examples = examples.size();
  log.epoch_losses.push_back(MeanLoss(model, examples));

  std::mt19937_64 rng(stage.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t e = 0; e < stage.epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t b = 0; b < order.size(); b += stage.batch_size) {
      const std::size_t end = std::min(order.size(), b + stage.batch_size);
      const double scale = 1.0 / static_cast<double>(end - b);
      EncoderGradients grads = model.encoder.ZeroGradients();
      HeadGrads head_grads{YesNoHead::Zero(width), SpanHead::Zero(width)};
      for (std::size_t i = b; i < end; ++i) {
        ExampleLoss(model, examples[order[i]], scale, &grads, &head_grads);
      }
      const double lr = stage.learning_rate;
      model.encoder.ApplyGradients(grads, lr);
      if (IsBinaryKind(stage.kind)) {
        for (std::size_t k = 0; k < width; ++k) {
          model.binary_head->weights[k] -= lr * head_grads.binary.weights[k];
        }
        model.binary_head->bias -= lr * head_grads.binary.bias;
      } else {
        auto w = model.span_head->weights.data();
        const auto g = head_grads.span.weights.data();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * g[k];
        model.span_head->bias[0] -= lr * head_grads.span.bias[0];
        model.span_head->bias[1] -= lr * head_grads.span.bias[1];
      }
    }
    log.epoch_losses.push_back(MeanLoss(model, examples));
  }
  log.end_checksum = model.encoder.Checksum();
  return log;
}

std::vector<std::string> PredictSpans(const ToyModel& model,
                                      const SquadInstance& instance,
                                      std::size_t k) {
  if (!model.span_head) return {};
  const HiddenStates h = model.encoder.Encode(instance.question, instance.context);
  const SpanDistributions d = ComputeSpanDistributions(h, *model.span_head);
  const std::size_t first = Tokenize(instance.question).size() + 2;
  const std::size_t last = h.length() - 1;  // trailing [SEP]
  // Over-fetch so that distinct strings still fill k slots after dedup.
  const auto spans = DecodeSpans(d.start, d.end, k * 4, kDefaultMaxAnswerTokens,
                                 CharRange{first, last});
  const std::u32string context = utf8::Decode(instance.context);
  std::vector<std::string> out;
  for (const SpanPrediction& p : spans) {
    const CharRange a = *h.provenance[p.start_index];
    const CharRange b = *h.provenance[p.end_index];
    std::string text = utf8::Encode(
        std::u32string_view(context).substr(a.begin, b.end - a.begin));
    if (std::find(out.begin(), out.end(), text) == out.end()) {
      out.push_back(std::move(text));
    }
    if (out.size() == k) break;
  }
  return out;
}

MetricsReport EvaluateModel(const ToyModel& model, const EvalSets& eval) {
  MetricsReport report;
  if (model.binary_head && !eval.yesno.empty()) {
    std::map<std::string, bool> preds, golds;
    for (const BinaryInstance& b : eval.yesno) {
      const HiddenStates h = model.encoder.Encode(b.question, b.context);
      preds[b.id] = YesProbability(h.values.row(0), *model.binary_head) >= 0.5;
      golds[b.id] = b.label;
    }
    report.yesno = EvalYesNo(preds, golds);
  }
  if (model.span_head && !eval.factoid.empty()) {
    std::map<std::string, std::vector<std::string>> preds;
    std::map<std::string, SynonymList> golds;
    for (const SquadInstance& s : eval.factoid) {
      preds[s.id] = PredictSpans(model, s);
      SynonymList& syn = golds[s.id];
      for (const AnswerSpan& a : s.answers) {
        if (std::find(syn.begin(), syn.end(), a.text) == syn.end()) {
          syn.push_back(a.text);
        }
      }
    }
    report.factoid = EvalFactoid(preds, golds);
  }
  if (model.span_head && !eval.list.empty()) {
    std::map<std::string, std::vector<std::string>> preds;
    std::map<std::string, std::vector<SynonymList>> golds;
    for (const SquadInstance& s : eval.list) {
      preds[s.id] = PredictSpans(model, s);
      auto& items = golds[s.id];
      for (const AnswerSpan& a : s.answers) {
        const bool seen = std::any_of(items.begin(), items.end(),
                                      [&](const SynonymList& it) {
                                        return it.front() == a.text;
                                      });
        if (!seen) items.push_back({a.text});
      }
    }
    report.list = EvalList(preds, golds);
  }
  report.macro_average =
      MacroAverage(report.yesno.macro_f1, report.factoid.mrr, report.list.f1);
  return report;
}

PlanResult RunPlan(const TransferPlan& plan, const EvalSets& eval_sets) {
  if (plan.stages.empty()) throw InvalidArgument("transfer plan has no stages");
  ToyModel model{ToyEncoder(plan.encoder), std::nullopt, std::nullopt};
  PlanResult result;
  for (const TrainingStage& stage : plan.stages) {
    try {
      result.stages.push_back(TrainStage(model, stage));
    } catch (const Error& e) {
      throw Error(e.kind(), "stage '" + stage.name + "': " + e.what());
    }
  }
  // Only the head of the final stage's task survives into evaluation.
  if (IsBinaryKind(plan.stages.back().kind)) {
    model.span_head.reset();
  } else {
    model.binary_head.reset();
  }
  result.metrics = EvaluateModel(model, eval_sets);
  result.final_checksum = model.encoder.Checksum();
  return result;
}

namespace {

const std::vector<std::string>& Fillers() {
  static const std::vector<std::string> kWords = {
      "protein", "cell",    "tissue",   "signal",   "pathway", "expression",
      "level",   "patients", "study",   "sample",   "receptor", "binding",
      "tumor",   "response", "dose",    "growth",   "liver",   "kidney",
      "plasma",  "neurons",  "cohort",  "therapy",  "marker",  "enzyme"};
  return kWords;
}

const std::string& Pick(const std::vector<std::string>& words,
                        std::mt19937_64& rng) {
  return words[rng() % words.size()];
}

std::string GeneSymbol(std::mt19937_64& rng) {
  std::string s;
  const std::size_t letters = 3 + rng() % 2;
  for (std::size_t i = 0; i < letters; ++i) {
    s.push_back(static_cast<char>('A' + rng() % 26));
  }
  s.push_back(static_cast<char>('1' + rng() % 9));
  return s;
}

}  // namespace

std::vector<BinaryInstance> SyntheticPairs(std::size_t count,
                                           std::uint64_t seed) {
  static const std::vector<std::string> kAgree = {"confirms", "supports",
                                                  "demonstrates"};
  static const std::vector<std::string> kDisagree = {"refutes", "denies",
                                                     "contradicts"};
  std::mt19937_64 rng(seed);
  std::vector<BinaryInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const bool label = i % 2 == 0;
    const std::string& a = Pick(Fillers(), rng);
    const std::string& b = Pick(Fillers(), rng);
    const std::string& c = Pick(Fillers(), rng);
    const std::string premise =
        "The " + a + " " + b + " was measured in the " + c + " group .";
    const std::string hypothesis = "This " +
                                   Pick(label ? kAgree : kDisagree, rng) +
                                   " that " + a + " " + b + " changes";
    out.push_back({"pair" + std::to_string(i), hypothesis, premise, label});
  }
  return out;
}

std::vector<BinaryInstance> SyntheticYesNo(std::size_t count,
                                           std::uint64_t seed) {
  static const std::vector<std::string> kYes = {"activates", "induces",
                                                "increases"};
  static const std::vector<std::string> kNo = {"never affects", "fails to alter",
                                               "has no effect on"};
  std::mt19937_64 rng(seed);
  std::vector<BinaryInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const bool label = i % 2 == 0;
    const std::string gene = GeneSymbol(rng);
    const std::string& target = Pick(Fillers(), rng);
    const std::string question = "Does " + gene + " affect " + target + " ?";
    const std::string context = gene + " " + Pick(label ? kYes : kNo, rng) +
                                " " + target + " in " + Pick(Fillers(), rng) +
                                " samples .";
    out.push_back({"yn" + std::to_string(i), question, context, label});
  }
  return out;
}

std::vector<SquadInstance> SyntheticSpans(std::size_t count,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SquadInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string gene = GeneSymbol(rng);
    const std::string& disease = Pick(Fillers(), rng);
    std::string context = "In";
    const std::size_t lead = 1 + rng() % 4;
    for (std::size_t k = 0; k < lead; ++k) context += " " + Pick(Fillers(), rng);
    context += " mutations of ";
    const std::size_t start = context.size();  // ASCII: bytes == characters
    context += gene + " were found in " + disease;
    const std::size_t tail = rng() % 3;
    for (std::size_t k = 0; k < tail; ++k) context += " " + Pick(Fillers(), rng);
    context += " .";
    out.push_back({"span" + std::to_string(i),
                   "Which gene is mutated in " + disease + " ?",
                   context,
                   {{start, start + gene.size(), gene}}});
  }
  return out;
}

namespace {

using nlohmann::json;

bool LabelValue(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "yes" || s == "entailment" || s == "true") return true;
    if (s == "no" || s == "not_entailment" || s == "false") return false;
  }
  throw SchemaError(where + ": label must be a boolean or yes/no");
}

StageData LoadSource(const json& source, const std::string& base_dir,
                     const std::string& where, std::string* ref) {
  StageData data;
  if (source.is_object() && source.contains("synthetic")) {
    const std::string kind = source["synthetic"].get<std::string>();
    const auto count = source.value("count", std::size_t{64});
    const auto seed = source.value("seed", std::uint64_t{1});
    *ref = "synthetic:" + kind + ":" + std::to_string(count) + ":" +
           std::to_string(seed);
    if (kind == "pairs") {
      data.binary = SyntheticPairs(count, seed);
    } else if (kind == "yesno") {
      data.binary = SyntheticYesNo(count, seed);
    } else if (kind == "spans") {
      data.spans = SyntheticSpans(count, seed);
    } else {
      throw SchemaError(where + ": unknown synthetic source '" + kind + "'");
    }
    return data;
  }
  if (!source.is_string()) {
    throw SchemaError(where + ": data must be a path or a synthetic source");
  }
  std::filesystem::path path(source.get<std::string>());
  if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
  *ref = source.get<std::string>();
  const std::string text = ReadFile(path.string());
  const json root = [&] {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what(), e.byte);
    }
  }();
  if (root.is_object() && root.contains("questions")) {
    const ParsedBioasq parsed = ParseBioasq(text);
    for (const BioasqQuestion& q : parsed.questions) {
      if (q.type == QuestionType::kYesNo) {
        for (BinaryInstance& b : ConvertYesNo(q)) data.binary.push_back(b);
      } else {
        for (SquadInstance& s :
             EnumerateQcaTriplets(q, ContextStrategy::SnippetAsIs())) {
          data.spans.push_back(std::move(s));
        }
      }
    }
  } else if (root.is_object() && root.contains("data")) {
    for (SquadInstance& s : FlattenInstances(ParseSquad(text).dataset)) {
      if (!s.answers.empty()) data.spans.push_back(std::move(s));
    }
  } else if (root.is_array()) {
    for (std::size_t i = 0; i < root.size(); ++i) {
      const json& r = root[i];
      const std::string w = where + " record " + std::to_string(i);
      BinaryInstance b;
      b.id = r.value("id", "r" + std::to_string(i));
      b.question = r.contains("hypothesis") ? r.value("hypothesis", "")
                                            : r.value("question", "");
      b.context = r.contains("premise") ? r.value("premise", "")
                                        : r.value("context", "");
      if (!r.contains("label")) throw SchemaError(w + ": missing 'label'");
      b.label = LabelValue(r["label"], w);
      if (b.context.empty()) throw SchemaError(w + ": empty context");
      data.binary.push_back(std::move(b));
    }
  } else {
    throw SchemaError(where + ": unrecognised data file '" + *ref + "'");
  }
  return data;
}

}  // namespace

PlanFile ParsePlan(std::string_view text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("plan: ") + e.what(), e.byte);
  }
  PlanFile out;
  try {
    if (auto it = root.find("encoder"); it != root.end()) {
      ToyEncoderConfig& c = out.plan.encoder;
      c.buckets = it->value("buckets", c.buckets);
      c.hidden_size = it->value("hidden_size", c.hidden_size);
      c.ngram = it->value("ngram", c.ngram);
      c.seed = it->value("seed", c.seed);
      c.init_scale = it->value("init_scale", c.init_scale);
    }
    if (!root.contains("stages") || !root["stages"].is_array() ||
        root["stages"].empty()) {
      throw SchemaError("plan: 'stages' must be a non-empty array");
    }
    for (std::size_t i = 0; i < root["stages"].size(); ++i) {
      const json& s = root["stages"][i];
      const std::string where = "plan stage " + std::to_string(i);
      TrainingStage stage;
      stage.name = s.value("name", "stage" + std::to_string(i));
      const auto kind = ParseTaskKind(s.value("task", ""));
      if (!kind) {
        throw SchemaError(where + ": 'task' must be pair, yesno or span");
      }
      stage.kind = *kind;
      stage.epochs = s.value("epochs", stage.epochs);
      stage.learning_rate = s.value("learning_rate", stage.learning_rate);
      stage.batch_size = s.value("batch_size", stage.batch_size);
      stage.seed = s.value("seed", stage.seed);
      const std::string policy = s.value("head_policy", "fresh");
      if (policy != "fresh" && policy != "reuse") {
        throw SchemaError(where + ": head_policy must be fresh or reuse");
      }
      stage.head_policy =
          policy == "reuse" ? HeadPolicy::kReuse : HeadPolicy::kFresh;
      if (!s.contains("data")) throw SchemaError(where + ": missing 'data'");
      stage.data = LoadSource(s["data"], base_dir, where, &stage.data_ref);
      out.plan.stages.push_back(std::move(stage));
    }
    if (auto it = root.find("eval"); it != root.end()) {
      std::string ref;
      if (it->contains("yesno")) {
        out.eval.yesno = LoadSource((*it)["yesno"], base_dir, "plan eval", &ref).binary;
      }
      if (it->contains("factoid")) {
        out.eval.factoid =
            LoadSource((*it)["factoid"], base_dir, "plan eval", &ref).spans;
      }
      if (it->contains("list")) {
        out.eval.list = LoadSource((*it)["list"], base_dir, "plan eval", &ref).spans;
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("plan: ") + e.what());
  }
  return out;
}

}  // namespace bioqa
