#include "bioqa/postprocess.h"

#include <set>

#include "bioqa/metrics.h"

namespace bioqa {

std::vector<std::string> DedupAnswers(const std::vector<std::string>& candidates) {
  return DedupAnswers(candidates, {});
}

std::vector<std::string> DedupAnswers(
    const std::vector<std::string>& candidates,
    const std::map<std::string, std::string>& aliases) {
  std::map<std::string, std::string> canonical;
  for (const auto& [from, to] : aliases) {
    canonical[NormalizeAnswer(from)] = NormalizeAnswer(to);
  }
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const std::string& c : candidates) {
    std::string key = NormalizeAnswer(c);
    if (auto it = canonical.find(key); it != canonical.end()) key = it->second;
    if (seen.insert(key).second) out.push_back(c);
  }
  return out;
}

}  // namespace bioqa
