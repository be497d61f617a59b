#pragma once

#include <string>

#include <json.hpp>

#include "evsurprise/classical.hpp"
#include "evsurprise/sweep.hpp"

namespace evsurprise {

inline constexpr int kResultsSchemaVersion = 1;

nlohmann::json curve_to_json(const SurpriseCurve& curve);
nlohmann::json recommendation_to_json(const ThresholdRecommendation& rec);
nlohmann::json classical_to_json(const ClassicalSelection& sel, const MrlTable& mrl);

// One row per (fit_threshold, eval_threshold).
std::string curve_csv(const SurpriseCurve& curve, const std::string& config_line);
std::string mrl_csv(const MrlTable& mrl, const std::string& config_line);
std::string gof_csv(const ClassicalSelection& sel, const std::string& config_line);

// Deterministic SVG diagnostic plot. `config_line` is embedded as metadata.
std::string curve_svg(const SurpriseCurve& curve, const ThresholdRecommendation& rec,
                      const std::string& config_line);

}  // namespace evsurprise
