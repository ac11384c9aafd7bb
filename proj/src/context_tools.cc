#include "bioqa/context_tools.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bioqa/error.h"
#include "bioqa/utf8.h"

namespace bioqa {

namespace {

bool IsTerminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool IsCloser(char32_t c) {
  return c == U')' || c == U']' || c == U'"' || c == U'\'' || c == U'”' ||
         c == U'’' || c == U'»';
}

bool IsOpener(char32_t c) {
  return c == U'(' || c == U'[' || c == U'"' || c == U'\'' || c == U'“' ||
         c == U'‘' || c == U'«';
}

bool StartsSentence(char32_t c) {
  return utf8::IsAsciiUpper(c) || utf8::IsDigit(c);
}

const std::unordered_set<std::u32string>& Abbreviations() {
  static const std::unordered_set<std::u32string> kGuard = {
      U"al",   U"Fig",  U"Figs", U"fig",  U"figs",  U"e.g",  U"i.e",
      U"cf",   U"vs",   U"approx", U"Dr", U"Mr",    U"Mrs",  U"Ms",
      U"Prof", U"Ref",  U"Refs", U"Eq",   U"Eqs",   U"No",   U"Nos",
      U"Vol",  U"pp",   U"St",   U"Jr",   U"Sr",    U"ca",   U"resp",
      U"Tab",  U"Suppl", U"Inc", U"Ltd",  U"Co",    U"sp",   U"spp",
      U"var",  U"subsp", U"Dept", U"Univ", U"Ph.D", U"M.D"};
  return kGuard;
}

// Period at `dot` closes a guarded abbreviation.
bool IsGuardedAbbreviation(std::u32string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !utf8::IsSpace(text[begin - 1])) --begin;
  while (begin < dot && IsOpener(text[begin])) ++begin;
  const std::u32string_view token = text.substr(begin, dot - begin);
  if (token.empty()) return false;
  if (token.size() == 1 && utf8::IsAsciiUpper(token[0])) return true;
  return Abbreviations().contains(std::u32string(token));
}

}  // namespace

std::vector<SentenceSpan> SegmentSentences(std::u32string_view text) {
  std::vector<SentenceSpan> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && utf8::IsSpace(text[start])) ++start;

  std::size_t i = start;
  while (i < n) {
    if (!IsTerminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && (IsTerminator(text[end]) || IsCloser(text[end]))) ++end;
    std::size_t next = end;
    while (next < n && utf8::IsSpace(text[next])) ++next;
    if (next == end || next == n) {
      i = end;
      continue;
    }
    std::size_t probe = next;
    if (IsOpener(text[probe]) && probe + 1 < n) ++probe;
    const bool boundary =
        StartsSentence(text[probe]) &&
        !(text[i] == U'.' && IsGuardedAbbreviation(text, i));
    if (boundary) {
      out.push_back({start, end});
      start = next;
    }
    i = end;
  }
  std::size_t last = n;
  while (last > start && utf8::IsSpace(text[last - 1])) --last;
  if (last > start) out.push_back({start, last});
  return out;
}

std::vector<SentenceSpan> SegmentSentences(std::string_view text) {
  return SegmentSentences(utf8::Decode(text));
}

SquadInstance ReduceToMinimalContext(const SquadInstance& instance,
                                     std::size_t* dropped_spans) {
  if (instance.answers.empty()) {
    throw InvalidArgument("instance '" + instance.id +
                          "' has no answer to anchor a minimal context");
  }
  const std::u32string context = utf8::Decode(instance.context);
  const std::vector<SentenceSpan> sentences = SegmentSentences(context);
  const AnswerSpan& anchor = instance.answers.front();

  // Sentence i owns [sentences[i].begin, sentences[i + 1].begin).
  auto owner = [&](std::size_t pos) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (sentences[k].begin <= pos) idx = k;
    }
    return idx;
  };

  std::size_t new_begin = anchor.start_char;
  std::size_t new_end = std::min(anchor.end_char, context.size());
  if (!sentences.empty()) {
    const std::size_t first = owner(anchor.start_char);
    const std::size_t last =
        owner(std::max(anchor.start_char, anchor.end_char - 1));
    new_begin = std::min(sentences[first].begin, new_begin);
    new_end = std::max(sentences[last].end, new_end);
  }
  new_end = std::min(new_end, context.size());
  new_begin = std::min(new_begin, new_end);

  SquadInstance out;
  out.id = instance.id;
  out.question = instance.question;
  out.context = utf8::Encode(
      std::u32string_view(context).substr(new_begin, new_end - new_begin));
  std::size_t dropped = 0;
  for (const AnswerSpan& span : instance.answers) {
    if (span.start_char >= new_begin && span.end_char <= new_end) {
      out.answers.push_back({span.start_char - new_begin,
                             span.end_char - new_begin, span.text});
    } else {
      ++dropped;
    }
  }
  if (dropped_spans != nullptr) *dropped_spans = dropped;
  return out;
}

std::size_t CountTokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char32_t c : utf8::Decode(text)) {
    const bool space = utf8::IsSpace(c);
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

LengthDistribution ComputeLengthDistribution(
    std::span<const std::string> contexts) {
  LengthDistribution dist;
  if (contexts.empty()) return dist;
  std::vector<std::size_t> lengths;
  lengths.reserve(contexts.size());
  for (const std::string& c : contexts) lengths.push_back(CountTokens(c));
  std::sort(lengths.begin(), lengths.end());

  double sum = 0.0;
  for (std::size_t len : lengths) {
    sum += static_cast<double>(len);
    ++dist.histogram[(len / kLengthBucketWidth) * kLengthBucketWidth];
  }
  const std::size_t n = lengths.size();
  dist.total = n;
  dist.mean = sum / static_cast<double>(n);
  dist.median = (n % 2 == 1)
                    ? static_cast<double>(lengths[n / 2])
                    : 0.5 * static_cast<double>(lengths[n / 2 - 1] +
                                                lengths[n / 2]);
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  dist.p95 = static_cast<double>(lengths[std::max<std::size_t>(rank, 1) - 1]);
  return dist;
}

DiscrepancyReport ComputeDiscrepancy(const LengthDistribution& a,
                                     const LengthDistribution& b) {
  if (a.total == 0 || b.total == 0) {
    throw InvalidArgument("discrepancy needs two non-empty distributions");
  }
  DiscrepancyReport report;
  report.mean_difference = std::abs(a.mean - b.mean);
  const double ta = static_cast<double>(a.total);
  const double tb = static_cast<double>(b.total);
  auto ia = a.histogram.begin();
  auto ib = b.histogram.begin();
  double l1 = 0.0;
  // Merge walk over the union of buckets.
  while (ia != a.histogram.end() || ib != b.histogram.end()) {
    if (ib == b.histogram.end() ||
        (ia != a.histogram.end() && ia->first < ib->first)) {
      l1 += static_cast<double>(ia->second) / ta;
      ++ia;
    } else if (ia == a.histogram.end() || ib->first < ia->first) {
      l1 += static_cast<double>(ib->second) / tb;
      ++ib;
    } else {
      l1 += std::abs(static_cast<double>(ia->second) / ta -
                     static_cast<double>(ib->second) / tb);
      ++ia;
      ++ib;
    }
  }
  report.histogram_l1 = l1;
  return report;
}

}  // namespace bioqa
