#pragma once

#include "manidel/atlas.hpp"
#include "manidel/complex.hpp"
#include "manidel/perturbation.hpp"
#include "manidel/simplex.hpp"

#include <json.hpp>

#include <string>

namespace manidel {

// Report builders. Every field is a function of the inputs and the seed except
// those named "seconds".
nlohmann::json params_json(const AlgorithmParams& p);
nlohmann::json run_report_json(const RunReport& r);
nlohmann::json forbidden_json(const std::vector<ForbiddenConfig>& scan);
nlohmann::json validation_json(const ValidationReport& r);
nlohmann::json lemma_json(const LemmaReport& r);
nlohmann::json hoop_json(const HoopDistortionReport& r);
nlohmann::json manifold_json(const ManifoldReport& r);
nlohmann::json consistency_json(const ConsistencyReport& r);
nlohmann::json protection_json(const ProtectionSweep& s);
nlohmann::json oracle_json(const OracleDiff& d);
nlohmann::json metric_summary_json(const PLMetric& m);

void write_json(const nlohmann::json& doc, const std::string& path);

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };
// Level from MANIDEL_LOG (error|warn|info|debug), default warn.
LogLevel log_level();
void log(LogLevel level, const std::string& message);

}  // namespace manidel
