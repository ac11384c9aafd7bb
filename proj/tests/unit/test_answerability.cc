#include <cctype>
#include <sstream>

#include "bioqa/answerability.h"
#include "bioqa/converter.h"
#include "bioqa/error.h"
#include "doctest.h"
#include "test_util.h"

using namespace bioqa;

namespace {

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string Collapse(const std::string& s) {
  std::istringstream in(s);
  std::string w, out;
  while (in >> w) out += (out.empty() ? "" : " ") + w;
  // Keep one leading/trailing space if the input had whitespace there.
  if (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) out = " " + out;
  if (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) && out != " ") out += " ";
  return out;
}

bool Contains(const std::string& hay, const std::string& needle) {
  if (needle.empty()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (hay.compare(i, needle.size(), needle) != 0) continue;
    const bool left = i == 0 || !std::isalnum(static_cast<unsigned char>(hay[i - 1]));
    const std::size_t j = i + needle.size();
    const bool right = j == hay.size() || !std::isalnum(static_cast<unsigned char>(hay[j]));
    if (left && right) return true;
  }
  return false;
}

// ASCII-only reference for the ordered classifier.
MatchCategory Oracle(const SynonymList& syns, const std::vector<Snippet>& snippets) {
  auto any = [&](auto transform, const std::string& needle) {
    for (const Snippet& s : snippets) {
      if (Contains(transform(s.text), needle)) return true;
    }
    return false;
  };
  auto id = [](const std::string& s) { return s; };
  auto low = [](const std::string& s) { return Lower(s); };
  auto col = [](const std::string& s) { return Collapse(Lower(s)); };
  for (const auto& s : syns) if (any(id, s)) return MatchCategory::kExact;
  for (const auto& s : syns) if (any(low, Lower(s))) return MatchCategory::kLowercaseMatch;
  for (const auto& s : syns) {
    std::istringstream in(Lower(s));
    std::vector<std::string> tok;
    std::string w;
    while (in >> w) tok.push_back(w);
    std::string joined;
    for (const auto& t : tok) joined += (joined.empty() ? "" : " ") + t;
    if (any(col, joined)) return MatchCategory::kWhitespaceVariant;
  }
  for (const auto& s : syns) {
    std::istringstream in(Lower(s));
    std::vector<std::string> tok;
    std::string w;
    while (in >> w) tok.push_back(w);
    const std::size_t n = tok.size();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t e = b + 1; e <= n; ++e) {
        const std::size_t len = e - b;
        if (len == n || 2 * len < n) continue;
        std::string phrase;
        for (std::size_t k = b; k < e; ++k) phrase += (k == b ? "" : " ") + tok[k];
        if (any(col, phrase)) return MatchCategory::kAdditionalPhrase;
      }
    }
  }
  return MatchCategory::kNoMatch;
}

std::vector<Snippet> Snips(std::initializer_list<const char*> texts) {
  std::vector<Snippet> out;
  for (const char* t : texts) out.push_back({t, "d", std::nullopt});
  return out;
}

BioasqQuestion Question(std::string id, QuestionType type,
                        std::vector<SynonymList> items, std::vector<Snippet> snippets) {
  BioasqQuestion q;
  q.id = std::move(id);
  q.type = type;
  q.gold.items = std::move(items);
  q.snippets = std::move(snippets);
  return q;
}

}  // namespace

TEST_CASE("classify_match examples") {
  CHECK(ClassifyMatch({"TGM1"}, Snips({"mutation of (TGM1) here"})) == MatchCategory::kExact);
  CHECK(ClassifyMatch({"Knowledge about homologous genes from model organisms"},
                      Snips({"... knowledge about homologous genes from model organisms ..."})) ==
        MatchCategory::kLowercaseMatch);
  CHECK(ClassifyMatch({"heart  failure"}, Snips({"acute heart failure"})) ==
        MatchCategory::kWhitespaceVariant);
  CHECK(ClassifyMatch({"heart failure"}, Snips({"acute heart failure"})) ==
        MatchCategory::kWhitespaceVariant);
  CHECK(ClassifyMatch({"heart-failure"}, Snips({"heart failure"})) != MatchCategory::kWhitespaceVariant);
  const MatchCategory tgm = ClassifyMatch({"transglutaminase-1 gene (TGM1) mutations"},
                                          Snips({"mutation of the transglutaminase 1 gene (TGM1)"}));
  CHECK((tgm == MatchCategory::kAdditionalPhrase || tgm == MatchCategory::kNoMatch));
  CHECK(tgm == MatchCategory::kAdditionalPhrase);  // "gene (tgm1)" covers 2 of 4 tokens
  CHECK(ClassifyMatch({"alpha beta gamma"}, Snips({"only alpha here"})) == MatchCategory::kNoMatch);
  CHECK(ClassifyMatch({"x"}, {}) == MatchCategory::kNoMatch);
  CHECK_THROWS(ClassifyMatch({}, Snips({"x"})));
}

TEST_CASE("classify_match agrees with the ASCII oracle") {
  testing::Gen gen(8);
  static const std::vector<std::string> kSeps = {" ", "  ", "\t", "-", ", ", "(", ")"};
  for (int trial = 0; trial < 3000; ++trial) {
    SynonymList syns;
    const std::size_t ns = 1 + gen.Index(2);
    for (std::size_t i = 0; i < ns; ++i) {
      std::string s = gen.Word(2);
      const std::size_t more = gen.Index(3);
      for (std::size_t k = 0; k < more; ++k) s += (gen.Coin() ? " " : "  ") + gen.Word(2);
      syns.push_back(s);
    }
    std::vector<Snippet> snippets;
    const std::size_t count = gen.Index(3);
    for (std::size_t i = 0; i < count; ++i) {
      std::string t;
      const std::size_t parts = 1 + gen.Index(6);
      for (std::size_t p = 0; p < parts; ++p) {
        std::string piece = gen.Coin() ? gen.Pick(syns) : gen.Word(2);
        if (gen.Index(3) == 0) piece = Lower(piece);
        t += piece + gen.Pick(kSeps);
      }
      snippets.push_back({t, "d", std::nullopt});
    }
    const MatchCategory got = ClassifyMatch(syns, snippets);
    CHECK(got == Oracle(syns, snippets));

    bool exact = false;
    for (const auto& s : syns) {
      for (const auto& sn : snippets) exact = exact || !FindExactSpans(sn.text, s, true).empty();
    }
    CHECK((got == MatchCategory::kExact) == exact);
  }
}

TEST_CASE("question_answerable") {
  const auto f = Question("f", QuestionType::kFactoid, {{"TGM1"}}, Snips({"TGM1 gene"}));
  CHECK(QuestionAnswerable(f).answerable);

  const auto l = Question("l", QuestionType::kList, {{"A1"}, {"B2"}, {"C3"}},
                          Snips({"A1 and B2", "c3 too"}));
  const auto a = QuestionAnswerable(l);
  CHECK_FALSE(a.answerable);
  CHECK(a.item_categories == std::vector<MatchCategory>{
                                 MatchCategory::kExact, MatchCategory::kExact,
                                 MatchCategory::kLowercaseMatch});

  const auto e = Question("e", QuestionType::kList, {{"A1"}, {"B2"}}, {});
  const auto ea = QuestionAnswerable(e);
  CHECK_FALSE(ea.answerable);
  CHECK(ea.item_categories == std::vector<MatchCategory>(2, MatchCategory::kNoMatch));

  CHECK_THROWS_AS(QuestionAnswerable(Question("y", QuestionType::kYesNo, {}, {})),
                  InvalidArgument);
}

TEST_CASE("adding a snippet never makes a question unanswerable") {
  testing::Gen gen(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SynonymList> items;
    const std::size_t n = 1 + gen.Index(3);
    for (std::size_t i = 0; i < n; ++i) items.push_back({gen.Word(2)});
    std::vector<Snippet> snippets;
    for (std::size_t s = gen.Index(3); s > 0; --s) {
      snippets.push_back({gen.Word() + " " + gen.Pick(items)[0] + " " + gen.Word(), "d", {}});
    }
    auto q = Question("m", QuestionType::kList, items, snippets);
    const bool before = QuestionAnswerable(q).answerable;
    q.snippets.push_back({gen.Word() + " " + gen.Word(), "d", {}});
    if (before) CHECK(QuestionAnswerable(q).answerable);
  }
}

TEST_CASE("audit aggregates by batch and type") {
  std::vector<BioasqQuestion> qs = {
      Question("a", QuestionType::kFactoid, {{"X1"}}, Snips({"X1 here"})),
      Question("b", QuestionType::kFactoid, {{"X1"}}, Snips({"x1 here"})),
      Question("c", QuestionType::kList, {{"P"}, {"Q"}}, Snips({"P only"})),
      Question("d", QuestionType::kFactoid, {{"Z"}}, Snips({"nothing"})),
      Question("y", QuestionType::kYesNo, {}, Snips({"ignored"})),
  };
  const std::map<std::string, std::string> batches = {{"a", "b1"}, {"b", "b1"}, {"c", "b2"}};
  const auto r = Audit(qs, batches);
  CHECK(r.rows.size() == 4);
  const AuditCell& f1 = r.batches.at("b1").at(QuestionType::kFactoid);
  CHECK(f1.unanswerable == 1);
  CHECK(f1.total == 2);
  CHECK(f1.categories.at(MatchCategory::kLowercaseMatch) == 1);
  CHECK(r.batches.at(std::string(kUnassignedBatch)).at(QuestionType::kFactoid).total == 1);
  CHECK(r.totals.at(QuestionType::kFactoid).unanswerable == 2);
  CHECK(r.totals.at(QuestionType::kList).unanswerable == 1);
  for (const auto& [type, cell] : r.totals) {
    std::size_t sum = 0;
    for (const auto& [cat, n] : cell.categories) {
      CHECK(cat != MatchCategory::kExact);
      sum += n;
    }
    CHECK(sum == cell.unanswerable);
  }

  UnanswerableReport merged = Audit(std::span(qs).subspan(0, 2), batches);
  merged += Audit(std::span(qs).subspan(2), batches);
  CHECK(merged.totals == r.totals);
  CHECK(merged.batches == r.batches);

  const std::vector<BioasqQuestion> clean = {qs[0], qs[0]};
  CHECK(Audit(clean, {}).totals.at(QuestionType::kFactoid).unanswerable == 0);
}

TEST_CASE("format_rate uses exact arithmetic") {
  CHECK(FormatRate(14, 39, 3, Rounding::kHalfEven) == "0.359");
  CHECK(FormatRate(35, 162, 3, Rounding::kHalfEven) == "0.216");
  CHECK(FormatRate(3, 25, 3, Rounding::kHalfEven) == "0.120");
  CHECK(FormatRate(18, 88, 3, Rounding::kHalfEven) == "0.205");
  CHECK(FormatRate(18, 88, 3, Rounding::kTruncate) == "0.204");
  CHECK(FormatRate(1, 8, 2, Rounding::kHalfEven) == "0.12");
  CHECK(FormatRate(3, 8, 2, Rounding::kHalfEven) == "0.38");
  CHECK(FormatRate(6, 12, 3, Rounding::kHalfEven) == "0.500");
  CHECK(FormatRate(0, 5, 3, Rounding::kHalfEven) == "0.000");
  CHECK(FormatRate(5, 5, 3, Rounding::kTruncate) == "1.000");
  CHECK(FormatRate(2, 3, 0, Rounding::kHalfEven) == "1");
}
