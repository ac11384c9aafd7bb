// Python bindings. Structured results cross the boundary as JSON text and are
// decoded in bioqa/__init__.py, so the schema matches the CLI outputs exactly.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bioqa/answerability.h"
#include "bioqa/context_tools.h"
#include "bioqa/converter.h"
#include "bioqa/error.h"
#include "bioqa/format_io.h"
#include "bioqa/metrics.h"
#include "bioqa/neural_heads.h"
#include "bioqa/postprocess.h"
#include "bioqa/report_json.h"
#include "bioqa/transfer_harness.h"

namespace py = pybind11;

namespace {

using Span = std::tuple<std::size_t, std::size_t, std::string>;

std::vector<Span> ToTuples(const std::vector<bioqa::AnswerSpan>& spans) {
  std::vector<Span> out;
  for (const auto& s : spans) out.emplace_back(s.start_char, s.end_char, s.text);
  return out;
}

bioqa::ContextStrategy Strategy(const std::string& name, std::size_t window, bool boundary) {
  const auto kind = bioqa::ParseStrategy(name);
  if (!kind) throw bioqa::InvalidArgument("unknown strategy '" + name + "'");
  return {*kind, window, boundary};
}

bioqa::AnswerMatching Matching(bool normalize) {
  return normalize ? bioqa::AnswerMatching::kNormalized : bioqa::AnswerMatching::kStrict;
}

std::pair<std::string, std::string> Convert(const std::string& bioasq_json,
                                            const std::string& strategy, std::size_t window,
                                            bool boundary) {
  const auto parsed = bioqa::ParseBioasq(bioasq_json);
  auto result = bioqa::ConvertDataset(parsed.questions, Strategy(strategy, window, boundary));
  result.report.summary_skipped = parsed.summary_skipped;
  return {bioqa::WriteSquad(bioqa::PackInstances(result.extractive, result.titles)),
          bioqa::ToJson(result.report).dump()};
}

std::pair<std::string, std::vector<Span>> Reduce(const std::string& context,
                                                 const std::vector<Span>& answers) {
  bioqa::SquadInstance x{"x", "", context, {}};
  for (const auto& [b, e, t] : answers) x.answers.push_back({b, e, t});
  const bioqa::SquadInstance r = bioqa::ReduceToMinimalContext(x);
  return {r.context, ToTuples(r.answers)};
}

std::string Audit(const std::vector<std::string>& bioasq_jsons,
                  const std::vector<std::string>& batch_names) {
  if (!batch_names.empty() && batch_names.size() != bioasq_jsons.size()) {
    throw bioqa::InvalidArgument("batch_names must match the number of files");
  }
  std::vector<bioqa::BioasqQuestion> questions;
  std::map<std::string, std::string> labels;
  for (std::size_t i = 0; i < bioasq_jsons.size(); ++i) {
    for (auto& q : bioqa::ParseBioasq(bioasq_jsons[i]).questions) {
      if (!batch_names.empty()) labels[q.id] = batch_names[i];
      questions.push_back(std::move(q));
    }
  }
  return bioqa::ToJson(bioqa::Audit(questions, labels)).dump();
}

std::string LengthStats(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  bioqa::ordered_json out;
  const auto da = bioqa::ComputeLengthDistribution(a);
  out["a"] = bioqa::ToJson(da);
  if (!b.empty()) {
    const auto db = bioqa::ComputeLengthDistribution(b);
    out["b"] = bioqa::ToJson(db);
    out["discrepancy"] = bioqa::ToJson(bioqa::ComputeDiscrepancy(da, db));
  }
  return out.dump();
}

std::string RunPlan(const std::string& plan_json, const std::string& base_dir) {
  const bioqa::PlanFile plan = bioqa::ParsePlan(plan_json, base_dir);
  const bioqa::PlanResult r = bioqa::RunPlan(plan.plan, plan.eval);
  bioqa::ordered_json out;
  out["stages"] = bioqa::ordered_json::array();
  for (const auto& log : r.stages) out["stages"].push_back(bioqa::ToJson(log));
  out["final_checksum"] = r.final_checksum;
  out["metrics"] = bioqa::ToJson(r.metrics);
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the bioqa toolkit";

  auto base = py::register_exception<bioqa::Error>(m, "BioqaError", PyExc_ValueError);
  py::register_exception<bioqa::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<bioqa::SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<bioqa::InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<bioqa::IoError>(m, "IoError", base.ptr());
  py::register_exception<bioqa::DataMismatch>(m, "DataMismatch", base.ptr());

  m.def("find_exact_spans",
        [](const std::string& context, const std::string& answer, bool boundary) {
          return ToTuples(bioqa::FindExactSpans(context, answer, boundary));
        },
        py::arg("context"), py::arg("answer"), py::arg("boundary") = true,
        "(start, end, text) for every exact occurrence, offsets in code points.");
  m.def("convert_bioasq_json", &Convert, py::arg("bioasq_json"),
        py::arg("strategy") = "snippet", py::arg("window") = 1, py::arg("boundary") = true);

  m.def("segment_sentences",
        [](const std::string& text) {
          std::vector<std::pair<std::size_t, std::size_t>> out;
          for (const auto& s : bioqa::SegmentSentences(text)) out.emplace_back(s.begin, s.end);
          return out;
        },
        py::arg("text"));
  m.def("reduce_to_minimal_context", &Reduce, py::arg("context"), py::arg("answers"));
  m.def("count_tokens", [](const std::string& t) { return bioqa::CountTokens(t); });
  m.def("length_stats_json", &LengthStats, py::arg("a"), py::arg("b") = std::vector<std::string>{});

  m.def("classify_match",
        [](const std::vector<std::string>& synonyms, const std::vector<std::string>& snippets) {
          std::vector<bioqa::Snippet> s;
          for (const auto& text : snippets) s.push_back({text, "", std::nullopt});
          return std::string(bioqa::MatchCategoryName(bioqa::ClassifyMatch(synonyms, s)));
        },
        py::arg("synonyms"), py::arg("snippets"));
  m.def("audit_json", &Audit, py::arg("bioasq_jsons"),
        py::arg("batch_names") = std::vector<std::string>{});
  m.def("format_rate",
        [](std::size_t n, std::size_t d, int decimals, bool truncate) {
          return bioqa::FormatRate(n, d, decimals,
                                   truncate ? bioqa::Rounding::kTruncate : bioqa::Rounding::kHalfEven);
        },
        py::arg("numerator"), py::arg("denominator"), py::arg("decimals") = 3,
        py::arg("truncate") = false);

  m.def("normalize_answer", [](const std::string& a) { return bioqa::NormalizeAnswer(a); });
  m.def("eval_yesno",
        [](const std::map<std::string, bool>& preds, const std::map<std::string, bool>& golds) {
          const auto s = bioqa::EvalYesNo(preds, golds);
          return py::dict(py::arg("accuracy") = s.accuracy, py::arg("yes_f1") = s.yes_f1,
                          py::arg("no_f1") = s.no_f1, py::arg("macro_f1") = s.macro_f1,
                          py::arg("count") = s.count);
        },
        py::arg("predictions"), py::arg("golds"));
  m.def("eval_factoid",
        [](const std::map<std::string, std::vector<std::string>>& preds,
           const std::map<std::string, std::vector<std::string>>& golds, bool normalize) {
          const auto s = bioqa::EvalFactoid(preds, golds, Matching(normalize));
          return py::dict(py::arg("sacc") = s.strict_accuracy, py::arg("lacc") = s.lenient_accuracy,
                          py::arg("mrr") = s.mrr, py::arg("count") = s.count);
        },
        py::arg("predictions"), py::arg("golds"), py::arg("normalize") = true);
  m.def("eval_list",
        [](const std::map<std::string, std::vector<std::string>>& preds,
           const std::map<std::string, std::vector<std::vector<std::string>>>& golds,
           bool normalize) {
          const auto s = bioqa::EvalList(preds, golds, Matching(normalize));
          return py::dict(py::arg("precision") = s.precision, py::arg("recall") = s.recall,
                          py::arg("f1") = s.f1, py::arg("count") = s.count);
        },
        py::arg("predictions"), py::arg("golds"), py::arg("normalize") = true);
  m.def("macro_average", &bioqa::MacroAverage, py::arg("yesno_macro_f1"),
        py::arg("factoid_mrr"), py::arg("list_f1"));
  m.def("dedup_answers",
        [](const std::vector<std::string>& c, const std::map<std::string, std::string>& aliases) {
          return bioqa::DedupAnswers(c, aliases);
        },
        py::arg("candidates"), py::arg("aliases") = std::map<std::string, std::string>{});

  m.def("log_softmax", [](const std::vector<double>& z) { return bioqa::LogSoftmax(z); });
  m.def("sigmoid", &bioqa::Sigmoid);
  m.def("decode_spans",
        [](const std::vector<double>& start, const std::vector<double>& end, std::size_t k,
           std::size_t max_len) {
          std::vector<std::tuple<std::size_t, std::size_t, double>> out;
          for (const auto& p : bioqa::DecodeSpans(start, end, k, max_len)) {
            out.emplace_back(p.start_index, p.end_index, p.score);
          }
          return out;
        },
        py::arg("start_probs"), py::arg("end_probs"), py::arg("k") = bioqa::kDefaultTopK,
        py::arg("max_len") = bioqa::kDefaultMaxAnswerTokens);
  m.def("run_plan_json", &RunPlan, py::arg("plan_json"), py::arg("base_dir") = ".",
        py::call_guard<py::gil_scoped_release>());
}
