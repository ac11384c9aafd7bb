#include "bioqa/metrics.h"

#include <algorithm>
#include <functional>

#include "bioqa/error.h"
#include "bioqa/format_io.h"
#include "bioqa/utf8.h"

namespace bioqa {

namespace {

bool IsEdgePunct(char32_t c) {
  return !utf8::IsAlnum(c) && !utf8::IsSpace(c);
}

double F1(double precision, double recall) {
  return precision + recall > 0.0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
}

// Binary F1 with `positive` as the positive class.
double ClassF1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return F1(p, r);
}

template <typename Map, typename Golds>
void CheckIds(const Map& predictions, const Golds& golds) {
  if (golds.empty()) throw InvalidArgument("no gold answers to evaluate");
  for (const auto& [id, unused] : predictions) {
    if (!golds.contains(id)) {
      throw DataMismatch("prediction id '" + id + "' is not in the golden set");
    }
  }
}

}  // namespace

std::string NormalizeAnswer(std::string_view answer) {
  const std::u32string lower = utf8::ToLower(utf8::Decode(answer));
  std::u32string collapsed;
  bool in_space = false;
  for (char32_t c : lower) {
    if (utf8::IsSpace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !collapsed.empty()) collapsed.push_back(U' ');
    in_space = false;
    collapsed.push_back(c);
  }
  std::size_t b = 0;
  std::size_t e = collapsed.size();
  while (b < e && (IsEdgePunct(collapsed[b]) || collapsed[b] == U' ')) ++b;
  while (e > b && (IsEdgePunct(collapsed[e - 1]) || collapsed[e - 1] == U' ')) {
    --e;
  }
  return utf8::Encode(std::u32string_view(collapsed).substr(b, e - b));
}

bool AnswersEqual(std::string_view a, std::string_view b,
                  AnswerMatching matching) {
  if (matching == AnswerMatching::kStrict) return a == b;
  return NormalizeAnswer(a) == NormalizeAnswer(b);
}

YesNoScores EvalYesNo(const std::map<std::string, bool>& predictions,
                      const std::map<std::string, bool>& golds) {
  CheckIds(predictions, golds);
  std::size_t correct = 0;
  std::size_t yes_tp = 0, yes_fp = 0, yes_fn = 0;
  std::size_t no_tp = 0, no_fp = 0, no_fn = 0;
  for (const auto& [id, gold] : golds) {
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      (gold ? yes_fn : no_fn) += 1;
      continue;
    }
    const bool pred = it->second;
    if (pred == gold) {
      ++correct;
      (gold ? yes_tp : no_tp) += 1;
    } else if (pred) {
      ++yes_fp;
      ++no_fn;
    } else {
      ++no_fp;
      ++yes_fn;
    }
  }
  YesNoScores s;
  s.count = golds.size();
  s.accuracy = static_cast<double>(correct) / static_cast<double>(s.count);
  s.yes_f1 = ClassF1(yes_tp, yes_fp, yes_fn);
  s.no_f1 = ClassF1(no_tp, no_fp, no_fn);
  s.macro_f1 = 0.5 * (s.yes_f1 + s.no_f1);
  return s;
}

FactoidScores EvalFactoid(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, SynonymList>& golds, AnswerMatching matching) {
  CheckIds(predictions, golds);
  double strict = 0.0, lenient = 0.0, rr = 0.0;
  for (const auto& [id, synonyms] : golds) {
    auto it = predictions.find(id);
    if (it == predictions.end()) continue;
    const auto& ranked = it->second;
    if (ranked.size() > kMaxFactoidCandidates) {
      throw InvalidArgument("factoid prediction '" + id + "' has " +
                            std::to_string(ranked.size()) +
                            " candidates; at most 5 are allowed");
    }
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      bool hit = false;
      for (const std::string& syn : synonyms) {
        if (AnswersEqual(ranked[r], syn, matching)) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
      if (r == 0) strict += 1.0;
      lenient += 1.0;
      rr += 1.0 / static_cast<double>(r + 1);
      break;
    }
  }
  FactoidScores s;
  s.count = golds.size();
  const double n = static_cast<double>(s.count);
  s.strict_accuracy = strict / n;
  s.lenient_accuracy = lenient / n;
  s.mrr = rr / n;
  return s;
}

ListScores ScoreListQuestion(std::span<const std::string> predictions,
                             std::span<const SynonymList> gold_items,
                             AnswerMatching matching) {
  // Exact duplicates collapse; the predictions are a set.
  std::vector<std::string> preds;
  for (const std::string& p : predictions) {
    if (std::find(preds.begin(), preds.end(), p) == preds.end()) {
      preds.push_back(p);
    }
  }
  std::vector<std::vector<std::size_t>> edges(preds.size());
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gold_items.size(); ++g) {
      for (const std::string& syn : gold_items[g]) {
        if (AnswersEqual(preds[p], syn, matching)) {
          edges[p].push_back(g);
          break;
        }
      }
    }
  }
  // Augmenting-path maximum bipartite matching.
  std::vector<long> owner(gold_items.size(), -1);
  std::function<bool(std::size_t, std::vector<bool>&)> augment =
      [&](std::size_t p, std::vector<bool>& seen) {
        for (std::size_t g : edges[p]) {
          if (seen[g]) continue;
          seen[g] = true;
          if (owner[g] < 0 ||
              augment(static_cast<std::size_t>(owner[g]), seen)) {
            owner[g] = static_cast<long>(p);
            return true;
          }
        }
        return false;
      };
  std::size_t matched = 0;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    std::vector<bool> seen(gold_items.size(), false);
    if (augment(p, seen)) ++matched;
  }
  ListScores s;
  s.count = 1;
  s.precision =
      preds.empty() ? 0.0 : static_cast<double>(matched) / preds.size();
  s.recall = gold_items.empty()
                 ? 0.0
                 : static_cast<double>(matched) / gold_items.size();
  s.f1 = F1(s.precision, s.recall);
  return s;
}

ListScores EvalList(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, std::vector<SynonymList>>& golds,
    AnswerMatching matching) {
  CheckIds(predictions, golds);
  ListScores total;
  for (const auto& [id, items] : golds) {
    auto it = predictions.find(id);
    static const std::vector<std::string> kNone;
    const ListScores q =
        ScoreListQuestion(it == predictions.end() ? kNone : it->second, items,
                          matching);
    total.precision += q.precision;
    total.recall += q.recall;
    total.f1 += q.f1;
  }
  total.count = golds.size();
  const double n = static_cast<double>(total.count);
  total.precision /= n;
  total.recall /= n;
  total.f1 /= n;
  return total;
}

double MacroAverage(double yesno_macro_f1, double factoid_mrr, double list_f1) {
  return (yesno_macro_f1 + factoid_mrr + list_f1) / 3.0;
}

}  // namespace bioqa
