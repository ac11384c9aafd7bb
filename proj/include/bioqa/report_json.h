#ifndef BIOQA_REPORT_JSON_H_
#define BIOQA_REPORT_JSON_H_

#include "bioqa/answerability.h"
#include "bioqa/context_tools.h"
#include "bioqa/converter.h"
#include "bioqa/metrics.h"
#include "bioqa/transfer_harness.h"
#include "json.hpp"

namespace bioqa {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kRateDecimals = 3;
inline constexpr std::string_view kListRuleNote =
    "a list question counts as answerable only if every gold item has an "
    "exact match; per-item categories allow recomputing other rules";

ordered_json ToJson(const ConversionReport& report);
ordered_json ToJson(const AuditCell& cell);
ordered_json ToJson(const UnanswerableReport& report);
ordered_json ToJson(const MetricsReport& report);
ordered_json ToJson(const LengthDistribution& distribution);
ordered_json ToJson(const DiscrepancyReport& report);
ordered_json ToJson(const StageLog& log);

// "epoch,loss" rows; epoch 0 is the loss before any update.
std::string LossCsv(const StageLog& log);

// Shortest representation that round-trips, for deterministic text output.
std::string FormatDouble(double value);

}  // namespace bioqa

#endif  // BIOQA_REPORT_JSON_H_
