#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modnav/train/config.hpp"

namespace modnav::train {

// Fixed, versioned metrics schema; non-applicable cells stay empty.
inline constexpr const char* kMetricsCsvHeader =
    "update,mean_return,value_loss,policy_entropy,approx_kl,clip_fraction,"
    "command_l1,mode_entropy,module_entropy";

std::string metrics_csv_row(const MetricsRecord& rec);

// Parses a metrics CSV produced by this project. Throws config_error on a
// missing file or wrong header.
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

}  // namespace modnav::train
