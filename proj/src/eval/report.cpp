// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace tagdet::eval {
namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("no-gt"); }

std::string cell(const std::optional<double>& v) {
    if (!v) return "no-gt";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
    return buf;
}

std::string threshold_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["thresholds"] = report.thresholds;
    j["classes"] = report.classes;
    j["gt_counts"] = report.gt_counts;
    nlohmann::json ap = nlohmann::json::array();
    for (const auto& row : report.ap) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& v : row) r.push_back(opt(v));
        ap.push_back(std::move(r));
    }
    j["ap"] = std::move(ap);
    nlohmann::json m = nlohmann::json::array();
    for (const auto& v : report.map) m.push_back(opt(v));
    j["map"] = std::move(m);
    j["average"] = opt(report.average);
    return j;
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows, const std::string& title) {
    std::vector<double> thresholds;
    if (!rows.empty()) thresholds = rows.front().second.thresholds;

    std::size_t name_w = title.size();
    for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
    constexpr int col_w = 6;

    std::ostringstream os;
    char buf[64];
    auto pad = [&](const std::string& s) { os << s << std::string(name_w - s.size(), ' ') << " |"; };
    pad(title);
    for (double t : thresholds) {
        std::snprintf(buf, sizeof buf, "%*s", col_w, threshold_label(t).c_str());
        os << buf;
    }
    std::snprintf(buf, sizeof buf, " |%*s", col_w, "Avg");
    os << buf << '\n';
    os << std::string(name_w, '-') << "-+" << std::string(thresholds.size() * col_w, '-') << "-+"
       << std::string(col_w, '-') << '\n';
    for (const auto& [name, rep] : rows) {
        pad(name);
        for (const auto& v : rep.map) {
            std::snprintf(buf, sizeof buf, "%*s", col_w, cell(v).c_str());
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " |%*s", col_w, cell(rep.average).c_str());
        os << buf << '\n';
    }
    return os.str();
}

}  // namespace tagdet::eval
