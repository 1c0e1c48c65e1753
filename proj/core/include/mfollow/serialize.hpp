#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mfollow/admissibility.hpp"
#include "mfollow/cost.hpp"
#include "mfollow/pontryagin.hpp"
#include "mfollow/scenario_tree.hpp"
#include "mfollow/solver.hpp"
#include "mfollow/stopping.hpp"

namespace mfollow {

inline constexpr int kSchemaVersion = 1;

/// Lossless tree round-trip: doubles survive via shortest-round-trip
/// decimals, structure exactly.
nlohmann::json tree_to_json(const ScenarioTree& tree);
ScenarioTree tree_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const ControlPlan& plan);
ControlPlan plan_from_json(const nlohmann::json& j, const ScenarioTree& tree);

nlohmann::json solve_report_to_json(const SolveReport& report);
nlohmann::json certificate_to_json(const FBSDECertificate& cert);
nlohmann::json ladder_report_to_json(const LadderReport& report);
nlohmann::json joint_law_to_json(const JointLaw& law);

/// Shortest decimal that round-trips to the exact double.
std::string format_double(double v);

/// RFC-4180 CSV: CRLF line endings, '.' decimal separator, mandatory
/// header. Cells are joined with commas and never need quoting here.
std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Ladder table with columns n, V_n, gap_to_V, pp_distance, sup_distance,
/// y_neg_integral, iterations.
std::string ladder_csv(const LadderReport& report);

/// Stop-region dump: node, time, L value, payoff Z, envelope U, region flag.
std::string stop_region_csv(const ScenarioTree& tree, const AdaptedProcess& z,
                            const SnellEnvelope& snell);

/// Symmetric distance matrix with row/column labels.
std::string distance_matrix_csv(const std::vector<std::string>& labels,
                                const std::vector<std::vector<double>>& matrix);

/// Write atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace mfollow
