#pragma once

// Machine-readable run reports.  Entries keep insertion order so that two runs
// of the same scenario serialise identically apart from the wall time.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "cbundle/forms.hpp"

namespace cbundle {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

struct CheckEntry {
  enum class Kind { Positivity, Residual, Value, Error };
  std::string name;
  Kind kind = Kind::Residual;
  bool passed = false;
  std::optional<PositivityReport> sweep;
  double value = 0.0;
  double tolerance = 0.0;
  std::optional<double> expected;
  std::string message;
};

inline ordered_json to_json(const PositivityReport& r) {
  ordered_json j;
  j["label"] = r.label;
  j["min"] = std::isfinite(r.min_value) ? ordered_json(r.min_value) : ordered_json(nullptr);
  j["argmin"] = r.argmin;
  j["argmin_index"] = r.argmin_index;
  j["samples"] = r.samples;
  j["resolution"] = r.resolution;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

class Report {
 public:
  Report(std::string scenario, std::string recipe) : scenario_(std::move(scenario)), recipe_(std::move(recipe)) {}

  const std::string& scenario() const { return scenario_; }
  const std::string& recipe() const { return recipe_; }
  const std::vector<CheckEntry>& checks() const { return checks_; }
  ordered_json& parameters() { return parameters_; }
  ordered_json& resolutions() { return resolutions_; }
  ordered_json& values() { return values_; }
  const ordered_json& values() const { return values_; }
  void set_tolerance(double t) { tol_ = t; }
  void set_wall_time(double s) { wall_ = s; }

  const CheckEntry& add_positivity(const std::string& name, const PositivityReport& r) {
    CheckEntry e;
    e.name = name;
    e.kind = CheckEntry::Kind::Positivity;
    e.passed = r.passed;
    e.value = r.min_value;
    e.tolerance = r.tolerance;
    e.sweep = r;
    return push(std::move(e));
  }
  /// Passes iff value <= tolerance.
  const CheckEntry& add_residual(const std::string& name, double value, double tolerance) {
    CheckEntry e;
    e.name = name;
    e.kind = CheckEntry::Kind::Residual;
    e.value = value;
    e.tolerance = tolerance;
    e.passed = std::isfinite(value) && value <= tolerance;
    return push(std::move(e));
  }
  /// Passes iff |value - expected| <= tolerance.
  const CheckEntry& add_value(const std::string& name, double value, double expected, double tolerance) {
    CheckEntry e;
    e.name = name;
    e.kind = CheckEntry::Kind::Value;
    e.value = value;
    e.expected = expected;
    e.tolerance = tolerance;
    e.passed = std::abs(value - expected) <= tolerance;
    return push(std::move(e));
  }
  const CheckEntry& add_error(const std::string& name, const std::string& message) {
    CheckEntry e;
    e.name = name;
    e.kind = CheckEntry::Kind::Error;
    e.message = message;
    return push(std::move(e));
  }

  const CheckEntry* find(const std::string& name) const {
    for (const auto& c : checks_)
      if (c.name == name) return &c;
    return nullptr;
  }

  bool passed() const {
    if (checks_.empty()) return false;
    for (const auto& c : checks_)
      if (!c.passed) return false;
    return true;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["schema"] = kReportSchema;
    j["scenario"] = scenario_;
    j["recipe"] = recipe_;
    j["passed"] = passed();
    ordered_json cs = ordered_json::array();
    for (const auto& c : checks_) {
      ordered_json e;
      e["name"] = c.name;
      e["passed"] = c.passed;
      switch (c.kind) {
        case CheckEntry::Kind::Positivity:
          e["kind"] = "positivity";
          e["report"] = cbundle::to_json(*c.sweep);
          break;
        case CheckEntry::Kind::Residual:
          e["kind"] = "residual";
          e["value"] = c.value;
          e["tolerance"] = c.tolerance;
          break;
        case CheckEntry::Kind::Value:
          e["kind"] = "value";
          e["value"] = c.value;
          e["expected"] = *c.expected;
          e["tolerance"] = c.tolerance;
          break;
        case CheckEntry::Kind::Error:
          e["kind"] = "error";
          e["message"] = c.message;
          break;
      }
      cs.push_back(std::move(e));
    }
    j["checks"] = std::move(cs);
    if (!values_.is_null()) j["values"] = values_;
    ordered_json prov;
    prov["resolutions"] = resolutions_.is_null() ? ordered_json::object() : resolutions_;
    prov["tolerance"] = tol_;
    prov["parameters"] = parameters_.is_null() ? ordered_json::object() : parameters_;
    prov["wall_time_s"] = wall_;
    j["provenance"] = std::move(prov);
    return j;
  }

  std::string summary() const {
    std::string out = scenario_ + " (" + recipe_ + "): " + (passed() ? "PASS" : "FAIL") + "\n";
    char buf[160];
    for (const auto& c : checks_) {
      out += c.passed ? "  [pass] " : "  [FAIL] ";
      out += c.name;
      switch (c.kind) {
        case CheckEntry::Kind::Positivity:
          std::snprintf(buf, sizeof buf, ": min %.6g over %zu samples (tol %.3g)", c.sweep->min_value, c.sweep->samples,
                        c.sweep->tolerance);
          out += buf;
          break;
        case CheckEntry::Kind::Residual:
          std::snprintf(buf, sizeof buf, ": %.3g (<= %.3g)", c.value, c.tolerance);
          out += buf;
          break;
        case CheckEntry::Kind::Value:
          std::snprintf(buf, sizeof buf, ": %.6g (expected %.6g +- %.3g)", c.value, *c.expected, c.tolerance);
          out += buf;
          break;
        case CheckEntry::Kind::Error: out += ": " + c.message; break;
      }
      out += "\n";
    }
    return out;
  }

 private:
  const CheckEntry& push(CheckEntry e) {
    checks_.push_back(std::move(e));
    return checks_.back();
  }

  std::string scenario_, recipe_;
  std::vector<CheckEntry> checks_;
  ordered_json parameters_, resolutions_, values_;
  double tol_ = 1e-9;
  double wall_ = 0.0;
};

}  // namespace cbundle
