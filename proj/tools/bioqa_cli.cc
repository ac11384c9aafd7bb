// bioqa: command line front end for conversion, auditing, scoring and the
// toy transfer harness. Every subcommand writes a manifest next to its output.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bioqa/answerability.h"
#include "bioqa/context_tools.h"
#include "bioqa/converter.h"
#include "bioqa/error.h"
#include "bioqa/format_io.h"
#include "bioqa/metrics.h"
#include "bioqa/postprocess.h"
#include "bioqa/report_json.h"
#include "bioqa/toy_encoder.h"
#include "bioqa/transfer_harness.h"
#include "json.hpp"

namespace fs = std::filesystem;
using bioqa::ordered_json;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

int ExitCode(bioqa::Error::Kind kind) {
  switch (kind) {
    case bioqa::Error::Kind::kParse:
      return 3;
    case bioqa::Error::Kind::kSchema:
      return 4;
    case bioqa::Error::Kind::kInvalidArgument:
      return 5;
    case bioqa::Error::Kind::kIo:
      return 6;
    case bioqa::Error::Kind::kDataMismatch:
      return 7;
  }
  return 1;
}

void PrintError(const std::string& kind, const std::string& message, int code) {
  ordered_json err;
  err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << "\n";
}

std::string HashText(std::string_view text) {
  return bioqa::HexDigest(bioqa::Fnv1a64(
      {reinterpret_cast<const unsigned char*>(text.data()), text.size()}));
}

std::string Dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Tracks inputs, outputs and the effective configuration of one run.
class Run {
 public:
  Run(std::string command, ordered_json config)
      : command_(std::move(command)), config_(std::move(config)) {}

  std::string Read(const std::string& path) {
    std::string text = bioqa::ReadFile(path);
    inputs_.push_back({{"path", path}, {"fnv1a64", HashText(text)}});
    return text;
  }

  void Write(const std::string& path, const std::string& text) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    bioqa::WriteFile(path, text);
    outputs_.push_back({{"path", path}, {"fnv1a64", HashText(text)}});
  }

  void Finish(const std::string& manifest_path) {
    ordered_json m;
    m["tool"] = "bioqa";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["config"] = config_;
    m["config_hash"] = HashText(config_.dump());
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    bioqa::WriteFile(manifest_path, Dump(m));
  }

 private:
  std::string command_;
  ordered_json config_;
  ordered_json inputs_ = ordered_json::array();
  ordered_json outputs_ = ordered_json::array();
};

std::string ManifestFor(const std::string& output) {
  return output + ".manifest.json";
}

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool boundary = true;
  bool normalize = true;
};

ordered_json GlobalsJson(const Globals& g) {
  ordered_json j;
  j["seed"] = g.seed_set ? ordered_json(g.seed) : ordered_json(nullptr);
  j["boundary"] = g.boundary;
  j["normalize"] = g.normalize;
  return j;
}

// Contexts from either a SQuAD file (one per instance) or a BioASQ file (one
// per snippet).
std::vector<std::string> LoadContexts(const std::string& text) {
  const json root = json::parse(text, nullptr, false);
  std::vector<std::string> out;
  if (root.is_object() && root.contains("questions")) {
    for (const auto& q : bioqa::ParseBioasq(text).questions) {
      for (const auto& s : q.snippets) out.push_back(s.text);
    }
  } else {
    for (const auto& x : bioqa::FlattenInstances(bioqa::ParseSquad(text).dataset)) {
      out.push_back(x.context);
    }
  }
  return out;
}

// --- subcommands -----------------------------------------------------------

struct ConvertArgs {
  std::string in, out, report, binary_out, strategy = "snippet";
  std::size_t window = 1;
};

int Convert(const ConvertArgs& a, const Globals& g) {
  const auto kind = bioqa::ParseStrategy(a.strategy);
  if (!kind) throw bioqa::InvalidArgument("unknown strategy '" + a.strategy + "'");
  bioqa::ContextStrategy strategy{*kind, a.window, g.boundary};
  ordered_json cfg = GlobalsJson(g);
  cfg["strategy"] = a.strategy;
  cfg["window"] = a.window;
  Run run("convert", cfg);
  const auto parsed = bioqa::ParseBioasq(run.Read(a.in));
  auto result = bioqa::ConvertDataset(parsed.questions, strategy);
  result.report.summary_skipped = parsed.summary_skipped;
  for (const auto& x : result.extractive) {
    if (!bioqa::InstanceOffsetsValid(x)) {
      throw bioqa::DataMismatch("emitted instance '" + x.id + "' violates its offsets");
    }
  }
  run.Write(a.out, bioqa::WriteSquad(bioqa::PackInstances(result.extractive, result.titles)));
  if (!a.binary_out.empty()) {
    ordered_json bin = ordered_json::array();
    for (const auto& b : result.binary) {
      bin.push_back({{"id", b.id}, {"question", b.question}, {"context", b.context},
                     {"label", b.label}});
    }
    run.Write(a.binary_out, Dump(bin));
  }
  if (!a.report.empty()) {
    ordered_json r = bioqa::ToJson(result.report);
    r["strategy"] = a.strategy;
    run.Write(a.report, Dump(r));
  }
  run.Finish(ManifestFor(a.out));
  return 0;
}

int Filter(const std::string& in, const std::string& out, const std::string& report,
           const Globals& g) {
  Run run("filter", GlobalsJson(g));
  const auto parsed = bioqa::ParseSquad(run.Read(in));
  const auto before = bioqa::FlattenInstances(parsed.dataset).size();
  const auto result = bioqa::FilterUnmatchedSquad(parsed.dataset);
  run.Write(out, bioqa::WriteSquad(result.dataset));
  if (!report.empty()) {
    ordered_json r;
    r["instances_in"] = before;
    r["removed"] = result.removed_count;
    r["instances_out"] = before - result.removed_count;
    r["flagged_ids"] = parsed.flagged_ids;
    run.Write(report, Dump(r));
  }
  run.Finish(ManifestFor(out));
  return 0;
}

int Reduce(const std::string& in, const std::string& out, const std::string& report,
           const Globals& g) {
  Run run("reduce", GlobalsJson(g));
  const auto parsed = bioqa::ParseSquad(run.Read(in));
  std::vector<bioqa::SquadInstance> reduced;
  std::vector<std::string> titles;
  std::size_t dropped = 0, skipped = 0;
  for (const auto& article : parsed.dataset.articles) {
    for (const auto& para : article.paragraphs) {
      for (const auto& qa : para.qas) {
        if (qa.answers.empty()) {
          ++skipped;
          continue;
        }
        std::size_t d = 0;
        reduced.push_back(bioqa::ReduceToMinimalContext(qa, &d));
        titles.push_back(article.title);
        dropped += d;
      }
    }
  }
  run.Write(out, bioqa::WriteSquad(bioqa::PackInstances(reduced, titles)));
  if (!report.empty()) {
    ordered_json r;
    r["instances"] = reduced.size();
    r["answerless_skipped"] = skipped;
    r["spans_dropped"] = dropped;
    run.Write(report, Dump(r));
  }
  run.Finish(ManifestFor(out));
  return 0;
}

int Stats(const std::string& in, const std::string& vs, const std::string& out,
          const Globals& g) {
  Run run("stats", GlobalsJson(g));
  const auto a = bioqa::ComputeLengthDistribution(LoadContexts(run.Read(in)));
  ordered_json r;
  r["a"] = bioqa::ToJson(a);
  if (!vs.empty()) {
    const auto b = bioqa::ComputeLengthDistribution(LoadContexts(run.Read(vs)));
    r["b"] = bioqa::ToJson(b);
    r["discrepancy"] = bioqa::ToJson(bioqa::ComputeDiscrepancy(a, b));
  }
  run.Write(out, Dump(r));
  run.Finish(ManifestFor(out));
  return 0;
}

int AuditCmd(const std::vector<std::string>& inputs, const std::string& batches,
             const std::string& out, const Globals& g) {
  Run run("audit", GlobalsJson(g));
  std::vector<bioqa::BioasqQuestion> questions;
  std::map<std::string, std::string> labels;
  for (const std::string& path : inputs) {
    const auto parsed = bioqa::ParseBioasq(run.Read(path));
    for (const auto& q : parsed.questions) {
      // Without a batch map, each input file is a batch named by its stem.
      if (batches.empty()) labels[q.id] = fs::path(path).stem().string();
      questions.push_back(q);
    }
  }
  if (!batches.empty()) {
    const json b = json::parse(run.Read(batches));
    if (!b.is_object()) throw bioqa::SchemaError("batch map must be an object id -> batch");
    for (const auto& [id, label] : b.items()) {
      if (!label.is_string()) throw bioqa::SchemaError("batch label for '" + id + "' must be a string");
      labels[id] = label.get<std::string>();
    }
  }
  run.Write(out, Dump(bioqa::ToJson(bioqa::Audit(questions, labels))));
  run.Finish(ManifestFor(out));
  return 0;
}

struct EvaluateArgs {
  std::string golden, preds, out;
  bool allow_missing = false;
};

int Evaluate(const EvaluateArgs& a, const Globals& g) {
  ordered_json cfg = GlobalsJson(g);
  cfg["allow_missing"] = a.allow_missing;
  Run run("evaluate", cfg);
  const auto golden = bioqa::ParseBioasq(run.Read(a.golden)).questions;
  std::map<std::string, bioqa::QuestionType> types;
  for (const auto& q : golden) types[q.id] = q.type;
  const auto preds = bioqa::ParsePredictions(run.Read(a.preds), &types);

  std::map<std::string, bool> yes_gold;
  std::map<std::string, bioqa::SynonymList> factoid_gold;
  std::map<std::string, std::vector<bioqa::SynonymList>> list_gold;
  std::set<std::string> golden_ids;
  for (const auto& q : golden) {
    golden_ids.insert(q.id);
    bool present = false;
    switch (q.type) {
      case bioqa::QuestionType::kYesNo:
        yes_gold[q.id] = q.gold.yes_label.value_or(false);
        present = preds.yesno.contains(q.id);
        break;
      case bioqa::QuestionType::kFactoid:
        factoid_gold[q.id] = q.gold.items.empty() ? bioqa::SynonymList{} : q.gold.items[0];
        present = preds.factoid.contains(q.id);
        break;
      case bioqa::QuestionType::kList:
        list_gold[q.id] = q.gold.items;
        present = preds.list.contains(q.id);
        break;
    }
    if (!present && !a.allow_missing) {
      throw bioqa::DataMismatch("no prediction for golden question '" + q.id + "'");
    }
  }
  auto check_known = [&](const auto& m) {
    for (const auto& [id, unused] : m) {
      if (!golden_ids.contains(id)) {
        throw bioqa::DataMismatch("prediction '" + id + "' has no golden question");
      }
    }
  };
  check_known(preds.yesno);
  check_known(preds.factoid);
  check_known(preds.list);

  const auto matching = g.normalize ? bioqa::AnswerMatching::kNormalized
                                    : bioqa::AnswerMatching::kStrict;
  bioqa::MetricsReport report;
  if (!yes_gold.empty()) report.yesno = bioqa::EvalYesNo(preds.yesno, yes_gold);
  if (!factoid_gold.empty()) {
    report.factoid = bioqa::EvalFactoid(preds.factoid, factoid_gold, matching);
  }
  if (!list_gold.empty()) report.list = bioqa::EvalList(preds.list, list_gold, matching);
  report.macro_average =
      bioqa::MacroAverage(report.yesno.macro_f1, report.factoid.mrr, report.list.f1);
  run.Write(a.out, Dump(bioqa::ToJson(report)));
  run.Finish(ManifestFor(a.out));
  return 0;
}

int Dedup(const std::string& in, const std::string& aliases_path, const std::string& out,
          const Globals& g) {
  Run run("dedup", GlobalsJson(g));
  auto preds = bioqa::ParsePredictions(run.Read(in));
  std::map<std::string, std::string> aliases;
  if (!aliases_path.empty()) {
    const json j = json::parse(run.Read(aliases_path));
    if (!j.is_object()) throw bioqa::SchemaError("aliases must be an object alias -> canonical");
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) throw bioqa::SchemaError("alias '" + k + "' must map to a string");
      aliases[k] = v.get<std::string>();
    }
  }
  for (auto& [id, ranked] : preds.factoid) ranked = bioqa::DedupAnswers(ranked, aliases);
  for (auto& [id, items] : preds.list) items = bioqa::DedupAnswers(items, aliases);
  run.Write(out, bioqa::WritePredictions(preds));
  run.Finish(ManifestFor(out));
  return 0;
}

ordered_json WritePlanRun(Run& run, const bioqa::PlanResult& result, const fs::path& dir) {
  ordered_json checksums;
  ordered_json stages = ordered_json::array();
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const auto& log = result.stages[i];
    const std::string csv = "stage_" + std::to_string(i) + "_" + log.name + ".csv";
    run.Write((dir / csv).string(), bioqa::LossCsv(log));
    ordered_json s = bioqa::ToJson(log);
    s["loss_log"] = csv;
    stages.push_back(s);
  }
  checksums["stages"] = stages;
  checksums["final"] = result.final_checksum;
  run.Write((dir / "checksums.json").string(), Dump(checksums));
  run.Write((dir / "metrics.json").string(), Dump(bioqa::ToJson(result.metrics)));
  return checksums;
}

int TrainToy(const std::vector<std::string>& plans, const std::string& out, const Globals& g) {
  if (plans.empty() || plans.size() > 2) {
    throw bioqa::InvalidArgument("train-toy takes one plan, or two to compare");
  }
  Run run("train-toy", GlobalsJson(g));
  const fs::path dir(out);
  fs::create_directories(dir);
  ordered_json comparison = ordered_json::array();
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const std::string text = run.Read(plans[p]);
    bioqa::PlanFile plan =
        bioqa::ParsePlan(text, fs::path(plans[p]).parent_path().string());
    if (g.seed_set) {
      plan.plan.encoder.seed = g.seed;
      for (std::size_t i = 0; i < plan.plan.stages.size(); ++i) {
        plan.plan.stages[i].seed = g.seed + i;
      }
    }
    const bioqa::PlanResult result = bioqa::RunPlan(plan.plan, plan.eval);
    const fs::path sub = plans.size() == 1 ? dir : dir / (p == 0 ? "plan_a" : "plan_b");
    WritePlanRun(run, result, sub);
    ordered_json entry;
    entry["plan"] = plans[p];
    std::vector<std::string> order;
    for (const auto& s : plan.plan.stages) order.push_back(s.name);
    entry["stages"] = order;
    entry["final_checksum"] = result.final_checksum;
    entry["metrics"] = bioqa::ToJson(result.metrics);
    comparison.push_back(entry);
  }
  if (plans.size() == 2) {
    ordered_json c;
    c["plans"] = comparison;
    c["same_final_checksum"] =
        comparison[0]["final_checksum"] == comparison[1]["final_checksum"];
    c["macro_average_difference"] =
        comparison[0]["metrics"]["macro_average"].get<double>() -
        comparison[1]["metrics"]["macro_average"].get<double>();
    run.Write((dir / "comparison.json").string(), Dump(c));
  }
  run.Finish((dir / "manifest.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BioASQ-to-extractive QA toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML/INI file with option defaults (flags win)");

  Globals g;
  auto* seed = app.add_option("--seed", g.seed, "Seed override for train-toy");
  app.add_option("--boundary", g.boundary, "Require non-alphanumeric match neighbours")
      ->default_val(true);
  app.add_option("--normalize", g.normalize, "Normalize answers when scoring")
      ->default_val(true);

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "BioASQ -> SQuAD-format instances");
  convert->add_option("--in", conv.in)->required();
  convert->add_option("--out", conv.out)->required();
  convert->add_option("--strategy", conv.strategy)
      ->check(CLI::IsMember({"snippet", "abstract", "appended"}))
      ->default_val("snippet");
  convert->add_option("--window", conv.window)->default_val(1);
  convert->add_option("--report", conv.report);
  convert->add_option("--binary-out", conv.binary_out, "Yes/no instances as JSON");

  std::string in, out, report, vs, batches, golden, preds, aliases;
  std::vector<std::string> inputs, plans;
  auto* filter = app.add_subcommand("filter", "Drop SQuAD instances with bad offsets");
  filter->add_option("--in", in)->required();
  filter->add_option("--out", out)->required();
  filter->add_option("--report", report);

  auto* reduce = app.add_subcommand("reduce", "Cut contexts to the answer sentence");
  reduce->add_option("--in", in)->required();
  reduce->add_option("--out", out)->required();
  reduce->add_option("--report", report);

  auto* stats = app.add_subcommand("stats", "Context length distributions");
  stats->add_option("--in", in)->required();
  stats->add_option("--vs", vs);
  stats->add_option("--out", out)->required();

  auto* audit = app.add_subcommand("audit", "Unanswerable rate of the extractive setting");
  audit->add_option("--in", inputs)->required();
  audit->add_option("--batches", batches, "JSON object question id -> batch");
  audit->add_option("--out", out)->required();

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against golden answers");
  evaluate->add_option("--golden", eval.golden)->required();
  evaluate->add_option("--preds", eval.preds)->required();
  evaluate->add_option("--out", eval.out)->required();
  evaluate->add_flag("--allow-missing", eval.allow_missing,
                     "Score absent predictions as wrong instead of failing");

  auto* train = app.add_subcommand("train-toy", "Run a sequential transfer plan");
  train->add_option("--plan", plans, "One plan, or two to compare")->required();
  train->add_option("--out", out)->required();

  auto* dedup = app.add_subcommand("dedup", "Remove normalized duplicate answers");
  dedup->add_option("--in", in)->required();
  dedup->add_option("--out", out)->required();
  dedup->add_option("--aliases", aliases, "JSON object alias -> canonical form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what(), 2);
    return 2;
  }
  g.seed_set = seed->count() > 0;

  try {
    if (*convert) return Convert(conv, g);
    if (*filter) return Filter(in, out, report, g);
    if (*reduce) return Reduce(in, out, report, g);
    if (*stats) return Stats(in, vs, out, g);
    if (*audit) return AuditCmd(inputs, batches, out, g);
    if (*evaluate) return Evaluate(eval, g);
    if (*train) return TrainToy(plans, out, g);
    if (*dedup) return Dedup(in, aliases, out, g);
  } catch (const bioqa::Error& e) {
    const int code = ExitCode(e.kind());
    PrintError(bioqa::KindName(e.kind()), e.what(), code);
    return code;
  } catch (const json::exception& e) {
    PrintError("parse", e.what(), 3);
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    PrintError("io", e.what(), 6);
    return 6;
  }
  return 1;
}
