#include "cpd/report.hpp"

#include <stdexcept>

#include "cpd/rng.hpp"

namespace cpd {

nlohmann::json to_json(const DetectionReport& report) {
    nlohmann::json doc;
    doc["method"] = report.method;
    doc["cost"] = report.cost;
    doc["T"] = report.breakpoints.n_samples();
    doc["breakpoints"] = report.breakpoints.bkps();
    doc["n_bkps"] = report.breakpoints.n_changes();
    doc["sum_of_costs"] = report.sum_of_costs;
    doc["penalized_objective"] =
        report.penalized_objective ? nlohmann::json(*report.penalized_objective) : nlohmann::json(nullptr);
    doc["elapsed_ms"] = report.elapsed_ms;
    doc["prng"] = std::string(Rng::kAlgorithm);
    doc["config_echo"] = report.config_echo;
    return doc;
}

nlohmann::json breakpoints_json(const Segmentation& seg) {
    return {{"T", seg.n_samples()}, {"breakpoints", seg.bkps()}};
}

Segmentation segmentation_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("T") || !doc.contains("breakpoints")) {
        throw std::invalid_argument("breakpoints JSON must be an object with \"T\" and \"breakpoints\"");
    }
    const auto& t = doc.at("T");
    const auto& list = doc.at("breakpoints");
    if (!t.is_number_integer() || t.get<long long>() < 1 || !list.is_array()) {
        throw std::invalid_argument("malformed breakpoints JSON");
    }
    std::vector<Index> bkps;
    for (const auto& b : list) {
        if (!b.is_number_integer() || b.get<long long>() < 1) {
            throw std::invalid_argument("breakpoints must be positive integers");
        }
        bkps.push_back(b.get<Index>());
    }
    const auto n = t.get<Index>();
    if (bkps.empty() || bkps.back() != n) {
        throw std::invalid_argument("breakpoints must end with T");
    }
    return Segmentation::make(std::move(bkps), n);
}

} // namespace cpd
