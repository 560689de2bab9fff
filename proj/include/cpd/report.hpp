#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "cpd/signal.hpp"

namespace cpd {

struct DetectionReport {
    std::string method;
    std::string cost;
    Segmentation breakpoints;
    double sum_of_costs = 0.0;
    std::optional<double> penalized_objective;
    double elapsed_ms = 0.0;
    nlohmann::json config_echo = nlohmann::json::object();
};

nlohmann::json to_json(const DetectionReport& report);

/// Breakpoint files shared by generate, detect and evaluate:
/// {"T": int, "breakpoints": [ints ending with T]}.
nlohmann::json breakpoints_json(const Segmentation& seg);
Segmentation segmentation_from_json(const nlohmann::json& doc);

} // namespace cpd
