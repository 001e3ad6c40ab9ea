#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace nepstab {

enum class Verdict { kHolds, kFails, kUndecided };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// Outcome of a single check. The same record feeds the text and the JSON
/// renderers.
struct CheckRecord {
  std::string check_name;
  Verdict verdict = Verdict::kUndecided;
  std::optional<Eigen::VectorXd> witness;
  std::optional<double> margin;
  std::string certificate_method;
  nlohmann::json details = nlohmann::json::object();

  bool holds() const { return verdict == Verdict::kHolds; }
  bool fails() const { return verdict == Verdict::kFails; }
};

/// Doubles are written so that parsing them back is exact. Infinities and
/// NaN are written as the strings "inf", "-inf" and "nan".
nlohmann::json double_to_json(double x);
double double_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int cols_if_empty = 0);

nlohmann::json to_json(const CheckRecord& r);
CheckRecord check_record_from_json(const nlohmann::json& j);

}  // namespace nepstab
