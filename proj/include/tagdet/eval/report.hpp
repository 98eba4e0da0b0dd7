// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tagdet/eval/map.hpp"

namespace tagdet::eval {

/// {"thresholds":[..], "classes":[..], "gt_counts":[..], "ap":[[..]], "map":[..], "average":x}
/// Missing values are written as the string "no-gt".
nlohmann::json report_to_json(const EvalReport& report);

/// Rows of (setup name, report) rendered as
///   Setup | 0.3 0.4 0.5 0.6 0.7 | Avg
/// with mAP in percent, one decimal.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows,
                         const std::string& title = "Setup");

}  // namespace tagdet::eval
