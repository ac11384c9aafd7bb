#ifndef BIOQA_CONTEXT_TOOLS_H_
#define BIOQA_CONTEXT_TOOLS_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/model.h"

namespace bioqa {

// Sentence as a half-open character range into its source text. Ranges are
// trimmed of surrounding whitespace; together they cover every non-whitespace
// character of the text.
using SentenceSpan = CharRange;

// Rule-based splitter: a sentence ends at '.', '!' or '?' (optionally followed
// by closing quotes or brackets) when whitespace follows and the next
// character is an upper-case letter or a digit, possibly behind an opening
// quote or bracket. A period after a guarded abbreviation ("et al.", "Fig.",
// "e.g.", "i.e.", a single capital letter, ...) never ends a sentence.
std::vector<SentenceSpan> SegmentSentences(std::string_view text);
std::vector<SentenceSpan> SegmentSentences(std::u32string_view text);

// Replaces the context by the sentence holding the first answer's start, or
// by the shortest run of sentences covering that answer when it crosses a
// boundary. Offsets are re-based; answers outside the new context are dropped
// and counted in *dropped_spans when given. Throws InvalidArgument for an
// instance without answers.
SquadInstance ReduceToMinimalContext(const SquadInstance& instance,
                                     std::size_t* dropped_spans = nullptr);

inline constexpr std::size_t kLengthBucketWidth = 16;

struct LengthDistribution {
  // Bucket lower bound (multiple of kLengthBucketWidth) -> count.
  std::map<std::size_t, std::size_t> histogram;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  std::size_t total = 0;
};

// Number of whitespace-delimited tokens.
std::size_t CountTokens(std::string_view text);

// Median averages the two middle values; p95 uses the nearest-rank rule.
LengthDistribution ComputeLengthDistribution(
    std::span<const std::string> contexts);

struct DiscrepancyReport {
  double mean_difference = 0.0;  // |mean(a) - mean(b)|
  double histogram_l1 = 0.0;     // L1 between normalized histograms, in [0, 2]
};

// Throws InvalidArgument when either distribution is empty.
DiscrepancyReport ComputeDiscrepancy(const LengthDistribution& a,
                                     const LengthDistribution& b);

}  // namespace bioqa

#endif  // BIOQA_CONTEXT_TOOLS_H_
