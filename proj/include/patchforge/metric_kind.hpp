#pragma once

#include <map>
#include <string>
#include <string_view>

namespace patchforge {

// The four per-patch representative values. "std" is spelled stddev in code
// because of the namespace; its serialized name is "std".
enum class MetricKind { loss, grad, stddev, freq };

const char* metric_name(MetricKind kind);
MetricKind parse_metric(std::string_view name);  // throws ConfigError

// Partial map: a record carries only the metrics that have been computed.
// Ordered so serialization is deterministic.
using MetricScores = std::map<MetricKind, double>;

}  // namespace patchforge
