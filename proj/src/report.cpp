#include "cmio/report.hpp"

#include <json.hpp>

namespace cmio {

namespace {

using nlohmann::ordered_json;

ordered_json decisions(const std::vector<CiDecision>& ds) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : ds) {
    ordered_json j;
    j["variable"] = c.variable;
    j["conditioning"] = c.conditioning;
    j["p_value"] = c.p_value;
    j["independent"] = c.independent;
    if (c.underpowered) j["underpowered"] = true;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string report_json(const SelectionReport& rep, int indent) {
  ordered_json j;
  j["algorithm"] = std::string(to_string(rep.algorithm));
  j["treatment"] = rep.treatment;
  j["outcome"] = rep.outcome;
  j["selected"] = rep.selected;
  j["effect_estimate"] = rep.effect_estimate;
  j["alpha"] = rep.alpha_level;
  j["ci_policy"] = std::string(to_string(rep.policy));
  j["stopped_at_k"] = rep.stopped_at_k;
  j["max_k"] = rep.max_k;
  ordered_json steps = ordered_json::array();
  for (const auto& s : rep.per_k_trace) {
    ordered_json st;
    st["k"] = s.k;
    st["support"] = s.support;
    st["objective"] = s.objective;
    st["nested"] = s.nested;
    st["new_variable"] = s.new_variable ? ordered_json(*s.new_variable) : ordered_json(nullptr);
    st["outcome"] = std::string(to_string(s.outcome));
    st["ci_decisions"] = decisions(s.ci_decisions);
    steps.push_back(std::move(st));
  }
  j["per_k_trace"] = std::move(steps);
  if (rep.algorithm == Algorithm::alg2) {
    j["base_selection"] = rep.base_selection;
    j["pass1"] = decisions(rep.pass1);
    j["pass2"] = decisions(rep.pass2);
  }
  return j.dump(indent) + "\n";
}

}  // namespace cmio
