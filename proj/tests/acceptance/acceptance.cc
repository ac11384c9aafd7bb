// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is 1 if
// any criterion fails; skips (absent external data) do not fail the run.
//
// External data, when available:
//   BIOQA_BIOASQ7B_DIR   directory with the five 7B Phase-B golden files
//   BIOQA_SQUAD_TRAIN    SQuAD v1.1 train JSON
//   BIOQA_SQUAD_DEV      SQuAD v1.1 dev JSON

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bioqa/answerability.h"
#include "bioqa/context_tools.h"
#include "bioqa/converter.h"
#include "bioqa/format_io.h"
#include "bioqa/metrics.h"
#include "bioqa/neural_heads.h"
#include "bioqa/report_json.h"
#include "bioqa/transfer_harness.h"
#include "json.hpp"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace bioqa;
using namespace bioqa::testing;

namespace {

// Tolerances and limits, fixed here rather than on the command line.
constexpr double kMacroTol = 5e-5;
constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kSoftmaxTol = 1e-12;
constexpr double kUniformTol = 1e-9;
constexpr double kMetricTol = 1e-12;
constexpr double kSquadRemovedTol = 0.01;
constexpr double kAuditSeconds = 10.0;
constexpr double kSquadSeconds = 60.0;
constexpr double kHeadSeconds = 5.0;
constexpr double kHarnessSeconds = 30.0;

// Published unanswerable counts (unanswerable, total) per 7B batch.
constexpr std::pair<std::size_t, std::size_t> kPublishedFactoid[] = {
    {14, 39}, {3, 25}, {9, 29}, {4, 34}, {8, 35}};
constexpr std::pair<std::size_t, std::size_t> kPublishedList[] = {
    {1, 12}, {4, 17}, {5, 25}, {3, 22}, {6, 12}};

// Published SQuAD v1.1 sizes before and after offset filtering.
constexpr std::size_t kSquadTrainRemoved = 87412 - 82280;
constexpr std::size_t kSquadDevKept = 9986;
constexpr std::size_t kSquadDevRemoved = 10570 - 9986;

// Published 8B system rows: yes/no macro F1, factoid MRR, list F1, macro average.
struct MacroRow {
  const char* batch;
  double yesno, factoid, list, reported;
};
constexpr MacroRow kSystemRows[] = {
    {"8B batch 1", 0.8663, 0.4438, 0.3718, 0.5606},
    {"8B batch 2", 0.8928, 0.3533, 0.3798, 0.5420},
    {"8B batch 3", 0.9028, 0.3601, 0.4520, 0.5716},
    {"8B batch 4", 0.7636, 0.6078, 0.4037, 0.5917},
    {"8B batch 5", 0.8518, 0.5677, 0.5582, 0.6592},
};

int failures = 0;

void Report(const std::string& id, const std::string& verdict, const std::string& detail) {
  if (verdict == "FAIL") ++failures;
  std::cout << verdict << " [" << id << "] " << detail << std::endl;
}

void Verdict(const std::string& id, bool ok, const std::string& detail) {
  Report(id, ok ? "PASS" : "FAIL", detail);
}

class Timer {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

std::string Fraction(const AuditCell& c) {
  return std::to_string(c.unanswerable) + "/" + std::to_string(c.total);
}

UnanswerableReport AuditFiles(const std::vector<fs::path>& files) {
  std::vector<BioasqQuestion> questions;
  std::map<std::string, std::string> labels;
  for (const fs::path& f : files) {
    for (auto& q : ParseBioasq(ReadFile(f.string())).questions) {
      labels[q.id] = f.stem().string();
      questions.push_back(std::move(q));
    }
  }
  return Audit(questions, labels);
}

// --- 1 ---------------------------------------------------------------------

void CriterionAuditFixture(const fs::path& data) {
  Timer timer;
  const fs::path dir = data / "audit";
  const nlohmann::json expected = nlohmann::json::parse(ReadFile((dir / "expected.json").string()));
  std::vector<fs::path> files;
  for (const auto& [batch, unused] : expected["batches"].items()) files.push_back(dir / (batch + ".json"));
  const UnanswerableReport report = AuditFiles(files);

  bool ok = true;
  std::string detail;
  for (const auto& [batch, cells] : expected["batches"].items()) {
    for (QuestionType type : {QuestionType::kFactoid, QuestionType::kList}) {
      const std::string name(QuestionTypeName(type));
      const AuditCell& got = report.batches.at(batch).at(type);
      ok = ok && got.unanswerable == cells[name]["unanswerable"].get<std::size_t>() &&
           got.total == cells[name]["total"].get<std::size_t>();
      detail += " " + batch + "/" + name + "=" + Fraction(got);
    }
  }
  std::size_t label_mismatches = 0;
  for (const AuditRow& row : report.rows) {
    const std::string got = row.category ? std::string(MatchCategoryName(*row.category)) : "exact";
    label_mismatches += got != expected["labels"][row.id].get<std::string>();
  }
  ok = ok && label_mismatches == 0 && report.rows.size() == expected["labels"].size();
  const auto& tf = report.totals.at(QuestionType::kFactoid);
  const auto& tl = report.totals.at(QuestionType::kList);
  ok = ok && tf.unanswerable == expected["totals"]["factoid"]["unanswerable"].get<std::size_t>() &&
       tl.unanswerable == expected["totals"]["list"]["unanswerable"].get<std::size_t>();
  const double secs = timer.Seconds();
  ok = ok && secs < kAuditSeconds;
  Verdict("1 audit fixture", ok,
          "exact per-batch fractions;" + detail + "; totals factoid " + Fraction(tf) + " (" +
              FormatRate(tf.unanswerable, tf.total, 3, Rounding::kHalfEven) + "), list " +
              Fraction(tl) + "; hand labels mismatched " + std::to_string(label_mismatches) +
              "; " + Fmt(secs) + "s");
}

void CriterionAuditGolden() {
  const char* env = std::getenv("BIOQA_BIOASQ7B_DIR");
  if (env == nullptr || !fs::is_directory(env)) {
    Report("1 audit 7B golden", "SKIP", "BIOQA_BIOASQ7B_DIR not set; BioASQ 7B golden files absent");
    return;
  }
  Timer timer;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(env)) {
    if (e.path().extension() == ".json" &&
        e.path().filename().string().find("golden") != std::string::npos) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.size() != std::size(kPublishedFactoid)) {
    Verdict("1 audit 7B golden", false,
            "expected 5 *golden*.json files, found " + std::to_string(files.size()));
    return;
  }
  const UnanswerableReport report = AuditFiles(files);
  bool ok = true;
  std::string detail;
  for (std::size_t b = 0; b < files.size(); ++b) {
    const auto& cells = report.batches.at(files[b].stem().string());
    const AuditCell& f = cells.at(QuestionType::kFactoid);
    const AuditCell& l = cells.at(QuestionType::kList);
    ok = ok && f.unanswerable == kPublishedFactoid[b].first && f.total == kPublishedFactoid[b].second &&
         l.unanswerable == kPublishedList[b].first && l.total == kPublishedList[b].second;
    detail += " " + files[b].stem().string() + " factoid " + Fraction(f) + " list " + Fraction(l) + ";";
  }
  const double secs = timer.Seconds();
  ok = ok && secs < kAuditSeconds;
  Verdict("1 audit 7B golden", ok,
          detail + " totals factoid " + Fraction(report.totals.at(QuestionType::kFactoid)) +
              " list " + Fraction(report.totals.at(QuestionType::kList)) +
              " (published total cells 35/162, 18/88); " + Fmt(secs) + "s");
}

// --- 2 ---------------------------------------------------------------------

struct FilterCounts {
  std::size_t before = 0, removed = 0;
};

FilterCounts FilterFile(const char* path) {
  const ParsedSquad parsed = ParseSquad(ReadFile(path));
  return {FlattenInstances(parsed.dataset).size(), FilterUnmatchedSquad(parsed.dataset).removed_count};
}

void CriterionSquadFilter() {
  const char* train = std::getenv("BIOQA_SQUAD_TRAIN");
  const char* dev = std::getenv("BIOQA_SQUAD_DEV");
  if (train == nullptr || dev == nullptr || !fs::exists(train) || !fs::exists(dev)) {
    Report("2 squad filtering", "SKIP", "BIOQA_SQUAD_TRAIN/BIOQA_SQUAD_DEV not set; SQuAD v1.1 absent");
    return;
  }
  Timer timer;
  const FilterCounts t = FilterFile(train);
  const FilterCounts d = FilterFile(dev);
  const double secs = timer.Seconds();
  const double train_gap = std::fabs(static_cast<double>(t.removed) - kSquadTrainRemoved);
  const double dev_gap = std::fabs(static_cast<double>(d.before - d.removed) - kSquadDevKept);
  const bool ok = train_gap <= kSquadRemovedTol * kSquadTrainRemoved &&
                  dev_gap <= kSquadRemovedTol * kSquadDevRemoved && secs < kSquadSeconds;
  Verdict("2 squad filtering", ok,
          "train " + std::to_string(t.before) + " -> " + std::to_string(t.before - t.removed) +
              " (removed " + std::to_string(t.removed) + ", published 5132); dev " +
              std::to_string(d.before) + " -> " + std::to_string(d.before - d.removed) +
              " (published 9986); " + Fmt(secs) + "s");
}

// --- 3 ---------------------------------------------------------------------

void CriterionMacroAverage() {
  double worst = 0.0;
  for (const MacroRow& row : kSystemRows) {
    worst = std::max(worst, std::fabs(MacroAverage(row.yesno, row.factoid, row.list) - row.reported));
  }
  Verdict("3 macro average", worst <= kMacroTol,
          std::to_string(std::size(kSystemRows)) + " published rows, max |diff| " + Fmt(worst) +
              " (tol 5e-05)");
}

// --- 4 ---------------------------------------------------------------------

void CriterionHeadMath() {
  Timer timer;
  Gen gen(2020);
  double worst = 0.0;
  bool grads_ok = true;
  for (int i = 0; i < 100; ++i) {
    const HeadGradChecks r = CheckHeadGradients(gen, kGradStep, kGradTol);
    grads_ok = grads_ok && r.span.passed && r.yesno.passed;
    worst = std::max({worst, r.span.max_relative_error, r.yesno.max_relative_error});
  }
  double softmax_dev = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> logits(1 + gen.Index(512));
    const double scale = gen.Coin() ? 1.0 : 1000.0;
    for (double& v : logits) v = gen.Uniform(-scale, scale);
    double sum = 0.0;
    for (double l : LogSoftmax(logits)) sum += std::exp(l);
    softmax_dev = std::max(softmax_dev, std::fabs(sum - 1.0));
  }
  double uniform_dev = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t s = 1 + gen.Index(64);
    const std::size_t h = 1 + gen.Index(8);
    const HiddenStates hidden = RandomHidden(gen, s, h);
    const std::size_t b = gen.Index(s);
    const GoldSpan g{b, b + gen.Index(s - b)};
    uniform_dev = std::max(uniform_dev,
                           std::fabs(YesNoLossAndGradient(hidden, YesNoHead::Zero(h), gen.Coin(), 1.0,
                                                          nullptr, nullptr) -
                                     std::log(2.0)));
    uniform_dev = std::max(
        uniform_dev, std::fabs(SpanLossAndGradient(hidden, SpanHead::Zero(h), g, 1.0, nullptr, nullptr) -
                               std::log(static_cast<double>(s))));
  }
  const double secs = timer.Seconds();
  Verdict("4 head math",
          grads_ok && worst < kGradTol && softmax_dev <= kSoftmaxTol && uniform_dev <= kUniformTol &&
              secs < kHeadSeconds,
          "max grad rel err " + Fmt(worst) + " over 100 instances; softmax |sum-1| " + Fmt(softmax_dev) +
              "; uniform-loss dev " + Fmt(uniform_dev) + "; " + Fmt(secs) + "s");
}

// --- 5 ---------------------------------------------------------------------

void CriterionConversionOracle() {
  Gen gen(55);
  std::size_t agree = 0, instances = 0;
  constexpr std::size_t kQuestions = 1000;
  for (std::size_t n = 0; n < kQuestions; ++n) {
    const BioasqQuestion q = RandomQuestion(gen, n);
    const auto got = EnumerateQcaTriplets(q, ContextStrategy::SnippetAsIs());
    agree += got == OracleEnumerate(q);
    instances += got.size();
  }
  Verdict("5 conversion oracle", agree == kQuestions,
          std::to_string(agree) + "/" + std::to_string(kQuestions) + " questions agree (" +
              std::to_string(instances) + " instances)");
}

// --- 6 ---------------------------------------------------------------------

void CriterionMinimalContext() {
  Gen gen(66);
  std::vector<std::string> full, minimal, snippets;
  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    const std::size_t n = 3 + gen.Index(12);
    for (std::size_t k = 0; k < n; ++k) text += (k ? " " : "") + SentenceText(gen);
    const std::u32string t = utf8::Decode(text);
    SquadInstance x{"m" + std::to_string(i), "q", text, {}};
    for (std::size_t k = 1 + gen.Index(2); k > 0; --k) {
      const std::size_t b = gen.Index(t.size());
      const std::size_t e = b + 1 + gen.Index(std::min<std::size_t>(t.size() - b, 12));
      x.answers.push_back({b, e, utf8::Encode(std::u32string_view(t).substr(b, e - b))});
    }
    const SquadInstance r = ReduceToMinimalContext(x);
    const bool ok = InstanceOffsetsValid(r) && !r.answers.empty() &&
                    CountTokens(r.context) <= CountTokens(x.context) &&
                    utf8::Length(r.context) <= t.size() && ReduceToMinimalContext(r) == r;
    violations += !ok;
    full.push_back(x.context);
    minimal.push_back(r.context);
    snippets.push_back(SentenceText(gen));
  }
  const LengthDistribution snip = ComputeLengthDistribution(snippets);
  const double before = ComputeDiscrepancy(ComputeLengthDistribution(full), snip).histogram_l1;
  const double after = ComputeDiscrepancy(ComputeLengthDistribution(minimal), snip).histogram_l1;
  Verdict("6 minimal context", violations == 0 && after < before,
          "1000 instances, invariant violations " + std::to_string(violations) +
              "; L1 vs snippets full " + Fmt(before) + " -> minimal " + Fmt(after));
}

// --- 7 ---------------------------------------------------------------------

void CriterionMetricOracles() {
  Gen gen(77);
  const std::vector<std::string> pool = {"a", "A", "b", "b.", "c", "(d)", "e", " E ", "f"};
  std::size_t mismatches = 0, order_violations = 0;
  constexpr int kCases = 200;
  for (int trial = 0; trial < kCases; ++trial) {
    std::map<std::string, SynonymList> fgold;
    std::map<std::string, std::vector<std::string>> fpred, lpred;
    std::map<std::string, std::vector<SynonymList>> lgold;
    const std::size_t n = 1 + gen.Index(6);
    double sacc = 0, lacc = 0, rr = 0, p = 0, r = 0, f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "q" + std::to_string(i);
      SynonymList syn = {gen.Pick(pool)};
      if (gen.Coin()) syn.push_back(gen.Pick(pool));
      std::vector<std::string> ranked;
      for (std::size_t k = gen.Index(6); k > 0; --k) ranked.push_back(gen.Pick(pool));
      fgold[id] = syn;
      fpred[id] = ranked;
      std::size_t first = 0;
      for (std::size_t k = 0; k < ranked.size() && !first; ++k) {
        for (const auto& s : syn) {
          if (NormalizeAnswer(ranked[k]) == NormalizeAnswer(s)) first = k + 1;
        }
      }
      sacc += first == 1;
      lacc += first != 0;
      rr += first ? 1.0 / first : 0.0;

      std::vector<SynonymList> items;
      for (std::size_t k = 1 + gen.Index(5); k > 0; --k) items.push_back({gen.Pick(pool)});
      std::vector<std::string> preds, unique;
      for (std::size_t k = gen.Index(6); k > 0; --k) preds.push_back(gen.Pick(pool));
      for (const auto& x : preds) {
        if (std::find(unique.begin(), unique.end(), x) == unique.end()) unique.push_back(x);
      }
      lgold[id] = items;
      lpred[id] = preds;
      const double matched = static_cast<double>(BruteMatched(unique, items));
      const double qp = unique.empty() ? 0.0 : matched / unique.size();
      const double qr = matched / items.size();
      p += qp;
      r += qr;
      f += qp + qr > 0 ? 2 * qp * qr / (qp + qr) : 0.0;
    }
    const FactoidScores fs = EvalFactoid(fpred, fgold);
    const ListScores ls = EvalList(lpred, lgold);
    auto off = [](double a, double b) { return std::fabs(a - b) > kMetricTol; };
    mismatches += off(fs.strict_accuracy, sacc / n) || off(fs.lenient_accuracy, lacc / n) ||
                  off(fs.mrr, rr / n) || off(ls.precision, p / n) || off(ls.recall, r / n) ||
                  off(ls.f1, f / n);
    order_violations += !(fs.strict_accuracy <= fs.mrr + kMetricTol &&
                          fs.mrr <= fs.lenient_accuracy + kMetricTol);
  }
  Verdict("7 metric oracles", mismatches == 0 && order_violations == 0,
          std::to_string(kCases) + " cases, mismatches " + std::to_string(mismatches) +
              ", SAcc<=MRR<=LAcc violations " + std::to_string(order_violations));
}

// --- 8 ---------------------------------------------------------------------

std::string Serialize(const PlanResult& r) {
  ordered_json j;
  for (const StageLog& log : r.stages) j["stages"].push_back(ToJson(log));
  j["metrics"] = ToJson(r.metrics);
  j["final"] = r.final_checksum;
  return j.dump();
}

void CriterionHarness(const fs::path& data) {
  Timer timer;
  const fs::path dir = data / "plans";
  const PlanFile a = ParsePlan(ReadFile((dir / "nli_then_squad.json").string()), dir.string());
  const PlanFile b = ParsePlan(ReadFile((dir / "squad_then_nli.json").string()), dir.string());
  const PlanResult a1 = RunPlan(a.plan, a.eval);
  const PlanResult a2 = RunPlan(a.plan, a.eval);
  const PlanResult b1 = RunPlan(b.plan, b.eval);
  const bool identical = Serialize(a1) == Serialize(a2);

  bool chained = true;
  for (const PlanResult* r : {&a1, &b1}) {
    for (std::size_t k = 1; k < r->stages.size(); ++k) {
      chained = chained && r->stages[k].start_checksum == r->stages[k - 1].end_checksum;
    }
    chained = chained && r->stages.back().end_checksum == r->final_checksum;
  }
  const bool order_matters = a1.final_checksum != b1.final_checksum;

  ToyModel model{ToyEncoder(a.plan.encoder), std::nullopt, std::nullopt};
  TrainingStage frozen = a.plan.stages.front();
  frozen.learning_rate = 0.0;
  frozen.epochs = 1;
  const std::string before = model.encoder.Checksum();
  const StageLog log = TrainStage(model, frozen);
  const bool noop = log.end_checksum == before && model.encoder.Checksum() == before;

  const double secs = timer.Seconds();
  Verdict("8 harness", identical && chained && order_matters && noop && secs < kHarnessSeconds,
          std::string("repeat runs identical ") + (identical ? "yes" : "no") + "; checksums chain " +
              (chained ? "yes" : "no") + "; swapped order " + a1.final_checksum + " vs " +
              b1.final_checksum + "; lr=0 no-op " + (noop ? "yes" : "no") + "; " + Fmt(secs) + "s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bioqa acceptance run"};
  std::string data = BIOQA_TEST_DATA_DIR;
  app.add_option("--data", data, "Directory with bundled fixtures");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"1 audit fixture", [&] { CriterionAuditFixture(data); }},
      {"1 audit 7B golden", CriterionAuditGolden},
      {"2 squad filtering", CriterionSquadFilter},
      {"3 macro average", CriterionMacroAverage},
      {"4 head math", CriterionHeadMath},
      {"5 conversion oracle", CriterionConversionOracle},
      {"6 minimal context", CriterionMinimalContext},
      {"7 metric oracles", CriterionMetricOracles},
      {"8 harness", [&] { CriterionHarness(data); }},
  };
  for (const auto& [id, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      Verdict(id, false, std::string("threw: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
