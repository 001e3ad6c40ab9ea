#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nepstab/perturb.hpp"
#include "nepstab/stability.hpp"

namespace nepstab {

nlohmann::json kkt_point_to_json(const KktPoint& p);
KktPoint kkt_point_from_json(const nlohmann::json& j);
nlohmann::json index_sets_to_json(const IndexSets& s);
nlohmann::json cq_to_json(const CqReport& cq);

nlohmann::json solve_document(const QpNepGame& game,
                              const std::vector<KktPoint>& points,
                              double tol_active, const PositivityOptions& opt);

nlohmann::json stability_document(const StabilityReport& rep);

/// Recovers the check records of a stability document.
std::vector<CheckRecord> check_records_from_document(const nlohmann::json& doc);

nlohmann::json sweep_document(const SweepResult& sw, const CalmnessEstimate& est,
                              const BranchSummary& br, bool window_is_default);

// Text renderers work from the documents above.
std::string render_solve_text(const nlohmann::json& doc);
std::string render_stability_text(const nlohmann::json& doc);
std::string render_sweep_text(const nlohmann::json& doc);

}  // namespace nepstab
