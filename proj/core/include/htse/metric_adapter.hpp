// core/include/htse/metric_adapter.hpp

// Copyright 2026  The htse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "htse/signal.hpp"

namespace htse {

enum class MetricName { kPesq, kDnsmos };
std::string_view to_string(MetricName m);
/// Environment variable naming the executable: HTSE_PESQ_BIN / HTSE_DNSMOS_BIN.
std::string_view metric_env_var(MetricName m);

struct MetricProvenance {
  std::string tool;
  std::string version;
};

/// Process-boundary adapter for externally implemented quality metrics.
///
/// Protocol: `<bin> --version` prints a version string on its first stdout
/// line; `<bin> <estimate.wav> [<reference.wav>]` prints the score as the last
/// stdout line and exits 0. Any failure yields an absent value plus a warning.
class ExternalMetric {
 public:
  ExternalMetric(MetricName name, std::filesystem::path executable);

  /// Adapter configured by the environment, or nullopt when unset.
  static std::optional<ExternalMetric> from_env(MetricName name);

  /// PESQ needs a reference; DNSMOS ignores it.
  std::optional<double> score(const AudioSignal& estimate,
                              const AudioSignal* reference = nullptr) const;

  MetricName name() const { return name_; }
  const MetricProvenance& provenance() const { return provenance_; }

 private:
  MetricName name_;
  std::filesystem::path executable_;
  MetricProvenance provenance_;
};

}  // namespace htse
