#include "bioqa/report_json.h"

#include <charconv>

namespace bioqa {

namespace {

std::string Fraction(std::size_t num, std::size_t den) {
  return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ordered_json ToJson(const ConversionReport& r) {
  ordered_json j;
  j["questions_seen"] = r.questions_seen;
  j["instances_emitted"] = r.instances_emitted;
  j["spans_emitted"] = r.spans_emitted;
  j["binary_instances_emitted"] = r.binary_instances_emitted;
  j["questions_skipped_no_match"] = r.questions_skipped_no_match;
  j["yesno_without_snippets"] = r.yesno_without_snippets;
  j["appended_fallbacks"] = r.appended_fallbacks;
  j["missing_abstracts"] = r.missing_abstracts;
  j["summary_skipped"] = r.summary_skipped;
  j["questions_by_type"] = r.questions_by_type;
  j["instances_by_type"] = r.instances_by_type;
  return j;
}

ordered_json ToJson(const AuditCell& cell) {
  ordered_json j;
  j["unanswerable"] = cell.unanswerable;
  j["total"] = cell.total;
  j["fraction"] = Fraction(cell.unanswerable, cell.total);
  if (cell.total > 0) {
    j["rate"] = FormatRate(cell.unanswerable, cell.total, kRateDecimals,
                           Rounding::kHalfEven);
    j["rate_truncated"] = FormatRate(cell.unanswerable, cell.total,
                                     kRateDecimals, Rounding::kTruncate);
  } else {
    j["rate"] = nullptr;
    j["rate_truncated"] = nullptr;
  }
  ordered_json cats = ordered_json::object();
  for (const auto& [category, count] : cell.categories) {
    cats[std::string(MatchCategoryName(category))] = count;
  }
  j["categories"] = cats;
  return j;
}

ordered_json ToJson(const UnanswerableReport& r) {
  ordered_json j;
  j["list_rule"] = kListRuleNote;
  ordered_json batches = ordered_json::object();
  for (const auto& [batch, cells] : r.batches) {
    ordered_json b = ordered_json::object();
    for (const auto& [type, cell] : cells) {
      b[std::string(QuestionTypeName(type))] = ToJson(cell);
    }
    batches[batch] = b;
  }
  j["batches"] = batches;
  ordered_json totals = ordered_json::object();
  for (const auto& [type, cell] : r.totals) {
    totals[std::string(QuestionTypeName(type))] = ToJson(cell);
  }
  j["totals"] = totals;
  ordered_json rows = ordered_json::array();
  for (const AuditRow& row : r.rows) {
    ordered_json o;
    o["id"] = row.id;
    o["batch"] = row.batch;
    o["type"] = QuestionTypeName(row.type);
    o["answerable"] = row.answerable;
    o["category"] = row.category
                        ? ordered_json(std::string(MatchCategoryName(*row.category)))
                        : ordered_json(nullptr);
    ordered_json items = ordered_json::array();
    for (MatchCategory c : row.item_categories) {
      items.push_back(std::string(MatchCategoryName(c)));
    }
    o["items"] = items;
    rows.push_back(o);
  }
  j["rows"] = rows;
  return j;
}

ordered_json ToJson(const MetricsReport& r) {
  ordered_json j;
  j["yesno"] = {{"accuracy", r.yesno.accuracy},
                {"yes_f1", r.yesno.yes_f1},
                {"no_f1", r.yesno.no_f1},
                {"macro_f1", r.yesno.macro_f1},
                {"count", r.yesno.count}};
  j["factoid"] = {{"sacc", r.factoid.strict_accuracy},
                  {"lacc", r.factoid.lenient_accuracy},
                  {"mrr", r.factoid.mrr},
                  {"count", r.factoid.count}};
  j["list"] = {{"precision", r.list.precision},
               {"recall", r.list.recall},
               {"f1", r.list.f1},
               {"count", r.list.count}};
  j["macro_average"] = r.macro_average;
  return j;
}

ordered_json ToJson(const LengthDistribution& d) {
  ordered_json j;
  j["total"] = d.total;
  j["mean"] = d.mean;
  j["median"] = d.median;
  j["p95"] = d.p95;
  j["bucket_width"] = kLengthBucketWidth;
  ordered_json hist = ordered_json::object();
  for (const auto& [bucket, count] : d.histogram) {
    hist[std::to_string(bucket)] = count;
  }
  j["histogram"] = hist;
  return j;
}

ordered_json ToJson(const DiscrepancyReport& r) {
  return {{"mean_difference", r.mean_difference},
          {"histogram_l1", r.histogram_l1}};
}

ordered_json ToJson(const StageLog& log) {
  ordered_json j;
  j["name"] = log.name;
  j["task"] = TaskKindName(log.kind);
  j["examples"] = log.examples;
  j["skipped"] = log.skipped;
  j["start_checksum"] = log.start_checksum;
  j["end_checksum"] = log.end_checksum;
  j["losses"] = log.epoch_losses;
  return j;
}

std::string LossCsv(const StageLog& log) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < log.epoch_losses.size(); ++e) {
    out += std::to_string(e) + "," + FormatDouble(log.epoch_losses[e]) + "\n";
  }
  return out;
}

}  // namespace bioqa
