#include "patchforge/metric_kind.hpp"

#include "patchforge/error.hpp"

namespace patchforge {

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::loss: return "loss";
    case MetricKind::grad: return "grad";
    case MetricKind::stddev: return "std";
    case MetricKind::freq: return "freq";
  }
  return "?";
}

MetricKind parse_metric(std::string_view name) {
  if (name == "loss") return MetricKind::loss;
  if (name == "grad") return MetricKind::grad;
  if (name == "std") return MetricKind::stddev;
  if (name == "freq") return MetricKind::freq;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected loss, grad, std, or freq)");
}

}  // namespace patchforge
