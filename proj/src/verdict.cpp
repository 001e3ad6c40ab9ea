#include <cmath>
#include <limits>

#include "nepstab/error.hpp"
#include "nepstab/verdict.hpp"

namespace nepstab {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kHolds:
      return "HOLDS";
    case Verdict::kFails:
      return "FAILS";
    case Verdict::kUndecided:
      return "UNDECIDED";
  }
  return "UNDECIDED";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "HOLDS") return Verdict::kHolds;
  if (s == "FAILS") return Verdict::kFails;
  if (s == "UNDECIDED") return Verdict::kUndecided;
  throw InputError("unknown verdict \"" + s + "\"");
}

json double_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double double_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw InputError("expected a number");
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(double_to_json(v(i)));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw InputError("expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = double_from_json(j[i]);
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_to_json(m.row(i)));
  return a;
}

Eigen::MatrixXd matrix_from_json(const json& j, int cols_if_empty) {
  if (!j.is_array()) throw InputError("expected an array");
  if (j.empty()) return Eigen::MatrixXd(0, cols_if_empty);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()),
                    static_cast<Eigen::Index>(j[0].size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j[0].size())
      throw InputError("ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = vector_from_json(j[i]).transpose();
  }
  return m;
}

json to_json(const CheckRecord& r) {
  json j;
  j["check_name"] = r.check_name;
  j["verdict"] = to_string(r.verdict);
  if (r.witness) j["witness"] = vector_to_json(*r.witness);
  if (r.margin) j["margin"] = double_to_json(*r.margin);
  j["certificate_method"] = r.certificate_method;
  j["details"] = r.details;
  return j;
}

CheckRecord check_record_from_json(const json& j) {
  CheckRecord r;
  r.check_name = j.at("check_name").get<std::string>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (j.contains("witness")) r.witness = vector_from_json(j["witness"]);
  if (j.contains("margin")) r.margin = double_from_json(j["margin"]);
  r.certificate_method = j.value("certificate_method", "");
  r.details = j.value("details", json::object());
  return r;
}

}  // namespace nepstab
