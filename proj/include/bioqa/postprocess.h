#ifndef BIOQA_POSTPROCESS_H_
#define BIOQA_POSTPROCESS_H_

#include <map>
#include <string>
#include <vector>

namespace bioqa {

// Drops candidates that normalize to the same string as an earlier one.
// Surface forms only: no abbreviation resolution.
std::vector<std::string> DedupAnswers(const std::vector<std::string>& candidates);

// Rewrites candidates through an alias table (e.g. the output of an external
// abbreviation resolver) before deduplication. Keys are matched after
// normalization.
std::vector<std::string> DedupAnswers(
    const std::vector<std::string>& candidates,
    const std::map<std::string, std::string>& aliases);

}  // namespace bioqa

#endif  // BIOQA_POSTPROCESS_H_
