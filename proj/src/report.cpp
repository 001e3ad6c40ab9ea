#include <cmath>
#include <iomanip>
#include <sstream>

#include "nepstab/report.hpp"

namespace nepstab {

using nlohmann::json;

json kkt_point_to_json(const KktPoint& p) {
  return json{{"x", vector_to_json(p.x)},
              {"lambda", vector_to_json(p.lambda)},
              {"active_set", p.active_set},
              {"residual", double_to_json(p.residual)},
              {"non_isolated", p.non_isolated}};
}

KktPoint kkt_point_from_json(const json& j) {
  KktPoint p;
  p.x = vector_from_json(j.at("x"));
  p.lambda = vector_from_json(j.at("lambda"));
  p.active_set = j.value("active_set", std::vector<int>{});
  p.residual = j.contains("residual") ? double_from_json(j["residual"]) : 0.0;
  p.non_isolated = j.value("non_isolated", false);
  return p;
}

json index_sets_to_json(const IndexSets& s) {
  json a = json::array();
  for (int k = 0; k < s.num_players(); ++k)
    a.push_back(json{{"I1", s.I1[k]}, {"I2", s.I2[k]}, {"I3", s.I3[k]}});
  return json{{"players", a}, {"tol_active", s.tol_active}};
}

json cq_to_json(const CqReport& cq) {
  json a = json::array();
  for (const PlayerCq& p : cq.players) {
    json j{{"licq", p.licq},
           {"smfcq", p.smfcq.holds},
           {"scsc", p.scsc},
           {"convex", p.convex},
           {"convex_min_eig", double_to_json(p.convex_min_eig)},
           {"ssosc", to_json(p.ssosc)}};
    if (p.smfcq.direction) j["smfcq_direction"] = vector_to_json(*p.smfcq.direction);
    if (!p.smfcq.reason.empty()) j["smfcq_reason"] = p.smfcq.reason;
    a.push_back(j);
  }
  return a;
}

json solve_document(const QpNepGame& game, const std::vector<KktPoint>& points,
                    double tol_active, const PositivityOptions& opt) {
  const Perturbation p0 = zero_perturbation(game);
  json pts = json::array();
  for (size_t i = 0; i < points.size(); ++i) {
    json j = kkt_point_to_json(points[i]);
    j["index"] = i;
    j["index_sets"] =
        index_sets_to_json(classify_index_sets(game, p0, points[i], tol_active));
    j["local_nash"] =
        to_json(check_local_nash(game, p0, points[i], opt, tol_active));
    pts.push_back(j);
  }
  return json{{"command", "solve"},
              {"num_points", points.size()},
              {"points", pts},
              {"warnings", game.warnings}};
}

json stability_document(const StabilityReport& rep) {
  json checks = json::array();
  for (const CheckRecord* c : rep.checks()) checks.push_back(to_json(*c));
  return json{{"command", "analyze"},
              {"point", kkt_point_to_json(rep.point)},
              {"index_sets", index_sets_to_json(rep.sets)},
              {"cq", cq_to_json(rep.cq)},
              {"jacobian", matrix_to_json(rep.jacobian.J)},
              {"checks", checks}};
}

std::vector<CheckRecord> check_records_from_document(const json& doc) {
  std::vector<CheckRecord> out;
  for (const json& c : doc.at("checks")) out.push_back(check_record_from_json(c));
  return out;
}

json sweep_document(const SweepResult& sw, const CalmnessEstimate& est,
                    const BranchSummary& br, bool window_is_default) {
  json steps = json::array();
  bool violated = false;
  for (const SweepStep& s : sw.steps) {
    json pts = json::array();
    for (size_t i = 0; i < s.points.size(); ++i) {
      json j = kkt_point_to_json(s.points[i]);
      j["branch"] = s.labels[i];
      j["local_nash"] = to_string(s.local_nash[i]);
      pts.push_back(j);
    }
    if (s.points.empty() && s.t != 0.0) violated = true;
    steps.push_back(json{{"t", double_to_json(s.t)}, {"points", pts}});
  }
  json branches = json::array();
  for (const Branch& b : br.branches)
    branches.push_back(json{{"label", b.label},
                            {"side", b.side},
                            {"num_steps", b.steps.size()},
                            {"intercept", vector_to_json(b.intercept)},
                            {"slope", vector_to_json(b.slope)},
                            {"fit_residual", double_to_json(b.fit_residual)}});
  json calm{{"existence_profile", est.existence_profile}};
  calm["kappa_hat"] = est.kappa_hat ? double_to_json(*est.kappa_hat) : json(nullptr);
  calm["kappa_hat_primal_dual"] = est.kappa_hat_primal_dual
                                      ? double_to_json(*est.kappa_hat_primal_dual)
                                      : json(nullptr);
  json summary{{"branches_negative", br.branches_negative},
               {"branches_positive", br.branches_positive},
               {"kink_at_zero", br.kink_at_zero},
               {"bifurcation_at_zero", br.bifurcation_at_zero},
               {"ambiguous_matches", br.ambiguous},
               {"branches", branches}};
  if (br.kink_relative_gap)
    summary["kink_relative_gap"] = double_to_json(*br.kink_relative_gap);
  json doc{{"command", "perturb"},
           {"reference", kkt_point_to_json(sw.reference)},
           {"window", double_to_json(sw.window)},
           {"window_source", window_is_default ? "default" : "user"},
           {"steps", steps},
           {"calmness", calm},
           {"branch_summary", summary},
           {"robustness_violated", violated}};
  if (violated) doc["message"] = "robustness violated";
  return doc;
}

namespace {

std::string fmt_num(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "-";
  std::ostringstream os;
  os << std::setprecision(10) << j.get<double>();
  return os.str();
}

std::string fmt_vec(const json& j) {
  std::string s = "(";
  for (size_t i = 0; i < j.size(); ++i) {
    if (i) s += ", ";
    s += fmt_num(j[i]);
  }
  return s + ")";
}

std::string fmt_sets(const json& sets) {
  std::ostringstream os;
  const json& pl = sets.at("players");
  for (size_t k = 0; k < pl.size(); ++k)
    os << "    player " << k << ": I1=" << pl[k]["I1"].dump()
       << " I2=" << pl[k]["I2"].dump() << " I3=" << pl[k]["I3"].dump() << "\n";
  return os.str();
}

void render_check(std::ostringstream& os, const json& c) {
  os << "  " << std::left << std::setw(30) << c["check_name"].get<std::string>()
     << std::setw(10) << c["verdict"].get<std::string>();
  if (c.contains("margin")) os << " margin=" << fmt_num(c["margin"]);
  if (c.contains("witness")) os << " witness=" << fmt_vec(c["witness"]);
  const json& d = c["details"];
  if (d.contains("clause")) os << " clause=" << d["clause"].get<std::string>();
  os << " [" << c["certificate_method"].get<std::string>() << "]\n";
}

}  // namespace

std::string render_solve_text(const json& doc) {
  std::ostringstream os;
  os << "KKT points: " << doc["num_points"].get<size_t>() << "\n";
  for (const json& p : doc["points"]) {
    os << "[" << p["index"].get<size_t>() << "] x=" << fmt_vec(p["x"])
       << " lambda=" << fmt_vec(p["lambda"]) << " residual=" << fmt_num(p["residual"]);
    if (p["non_isolated"].get<bool>()) os << " NON_ISOLATED";
    os << "\n" << fmt_sets(p["index_sets"]);
    os << "    local_nash: " << p["local_nash"]["verdict"].get<std::string>() << "\n";
  }
  for (const json& w : doc["warnings"]) os << "warning: " << w.get<std::string>() << "\n";
  return os.str();
}

std::string render_stability_text(const json& doc) {
  std::ostringstream os;
  const json& p = doc["point"];
  os << "point x=" << fmt_vec(p["x"]) << " lambda=" << fmt_vec(p["lambda"])
     << " residual=" << fmt_num(p["residual"]) << "\n";
  os << "index sets:\n" << fmt_sets(doc["index_sets"]);
  os << "constraint qualifications:\n";
  const json& cq = doc["cq"];
  for (size_t k = 0; k < cq.size(); ++k) {
    os << "    player " << k << ": LICQ=" << (cq[k]["licq"].get<bool>() ? "yes" : "no")
       << " SMFCQ=" << (cq[k]["smfcq"].get<bool>() ? "yes" : "no")
       << " SCSC=" << (cq[k]["scsc"].get<bool>() ? "yes" : "no")
       << " convex=" << (cq[k]["convex"].get<bool>() ? "yes" : "no")
       << " SSOSC=" << cq[k]["ssosc"]["verdict"].get<std::string>();
    if (cq[k]["ssosc"].contains("margin"))
      os << " (margin " << fmt_num(cq[k]["ssosc"]["margin"]) << ")";
    os << "\n";
  }
  os << "checks:\n";
  for (const json& c : doc["checks"]) render_check(os, c);
  return os.str();
}

std::string render_sweep_text(const json& doc) {
  std::ostringstream os;
  os << "reference x=" << fmt_vec(doc["reference"]["x"])
     << " lambda=" << fmt_vec(doc["reference"]["lambda"]) << "\n";
  os << "window " << fmt_num(doc["window"]) << " ("
     << doc["window_source"].get<std::string>() << ")\n";
  os << std::left << std::setw(14) << "t" << "points\n";
  for (const json& s : doc["steps"]) {
    os << std::setw(14) << fmt_num(s["t"]);
    if (s["points"].empty()) os << "none";
    bool first = true;
    for (const json& p : s["points"]) {
      if (!first) os << "\n" << std::setw(14) << "";
      first = false;
      os << "#" << p["branch"].get<int>() << " x=" << fmt_vec(p["x"])
         << " lambda=" << fmt_vec(p["lambda"]) << " " << p["local_nash"].get<std::string>();
    }
    os << "\n";
  }
  const json& c = doc["calmness"];
  os << "kappa_hat " << fmt_num(c["kappa_hat"]) << " (primal-dual "
     << fmt_num(c["kappa_hat_primal_dual"]) << ")\n";
  const json& b = doc["branch_summary"];
  os << "branches t<0: " << b["branches_negative"].get<int>()
     << "  t>0: " << b["branches_positive"].get<int>()
     << "  kink at 0: " << (b["kink_at_zero"].get<bool>() ? "yes" : "no")
     << "  bifurcation at 0: " << (b["bifurcation_at_zero"].get<bool>() ? "yes" : "no");
  if (b["ambiguous_matches"].get<bool>()) os << "  (ambiguous matches)";
  os << "\n";
  for (const json& br : b["branches"])
    os << "  branch #" << br["label"].get<int>() << " side "
       << (br["side"].get<int>() < 0 ? "t<0" : "t>0") << " slope=" << fmt_vec(br["slope"])
       << " residual=" << fmt_num(br["fit_residual"]) << "\n";
  if (doc["robustness_violated"].get<bool>()) os << "robustness violated\n";
  return os.str();
}

}  // namespace nepstab
