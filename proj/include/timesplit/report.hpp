#ifndef TIMESPLIT_REPORT_HPP
#define TIMESPLIT_REPORT_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "timesplit/search.hpp"

namespace timesplit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

namespace report {

using nlohmann::json;

inline json to_json(const TestResult& r) {
  json j;
  switch (r.method) {
    case TestMethod::RaoSpacing:
      j["method"] = "rao-spacing";
      j["statistic_degrees"] = r.statistic_degrees();
      break;
    case TestMethod::HartiganDip: j["method"] = "hartigan-dip"; break;
    case TestMethod::WatsonU2: j["method"] = "watson-u2"; break;
  }
  j["statistic"] = r.statistic;
  if (r.p_value) j["p_value"] = *r.p_value;
  if (r.critical_value) j["critical_value"] = *r.critical_value;
  j["alpha"] = r.alpha;
  j["reject"] = r.reject;
  return j;
}

inline json to_json(const VonMisesComponent& c) {
  return json{{"weight", c.weight},
              {"mean_radians", c.mean},
              {"mean_hours", radians_to_hours(c.mean)},
              {"kappa", c.kappa}};
}

inline json to_json(const ModelSelectionRecord& rec) {
  json sweep = json::array();
  for (const auto& c : rec.candidates)
    sweep.push_back(json{{"m", c.m},
                         {"bic", c.bic},
                         {"log_likelihood", c.log_lik},
                         {"parameters", c.param_count},
                         {"sample_size", c.sample_size}});
  return json{{"sweep", sweep}, {"chosen_m", rec.chosen}};
}

inline json to_json(const RefinementCandidate& cand) {
  json j;
  j["label"] = cand.label;
  j["sample_size"] = cand.sample_size;
  j["stage"] = std::string(to_string(cand.stage));
  j["eligible"] = cand.eligible;
  if (!cand.note.empty()) j["note"] = cand.note;
  if (cand.rao) j["rao"] = to_json(*cand.rao);
  if (cand.dip) j["dip"] = to_json(*cand.dip);
  if (cand.selection) j["model_selection"] = to_json(*cand.selection);
  if (cand.model) {
    json comps = json::array();
    for (const auto& c : cand.model->components) comps.push_back(to_json(c));
    j["components"] = comps;
    j["log_likelihood"] = cand.model->log_likelihood;
  }
  if (cand.assignment) {
    json clusters = json::array();
    for (size_t k = 0; k < cand.assignment->m; ++k) {
      json cl;
      cl["index"] = k;
      cl["count"] = cand.assignment->counts[k];
      if (cand.assignment->ranges[k]) {
        const auto& r = *cand.assignment->ranges[k];
        cl["hour_range"] = json::array({r.start_hours(), r.end_hours()});
      }
      if (k < cand.watson.size()) {
        cl["watson"] = to_json(cand.watson[k]);
        cl["watson_gate_critical"] = cand.watson_gate_critical;
      }
      clusters.push_back(cl);
    }
    j["clusters"] = clusters;
    j["refined_labels"] = cand.relabeling.refined;
  }
  if (cand.verdict) {
    json v;
    v["information_gain"] = cand.verdict->information_gain;
    json sig = json::array();
    for (const auto& [label, p] : cand.verdict->significant_activities)
      sig.push_back(json{{"label", label}, {"p_value", p}});
    v["activity_p_values"] = sig;
    v["significant_count"] = cand.verdict->significant_count();
    v["pass"] = cand.verdict->pass;
    j["control_flow"] = v;
  }
  return j;
}

inline json to_json(const PlanStep& step) {
  json j;
  j["label"] = step.label;
  j["refined_labels"] = step.relabeling.refined;
  json assignment = json::object();
  for (const auto& [id, cluster] : step.assignment) assignment[id] = cluster;
  j["assignment"] = assignment;
  j["information_gain"] = step.gain;
  j["bits_before"] = step.bits_before;
  j["bits_after"] = step.bits_after;
  json comps = json::array();
  for (const auto& c : step.components) comps.push_back(to_json(c));
  j["components"] = comps;
  json ranges = json::array();
  for (const auto& r : step.ranges) {
    if (r)
      ranges.push_back(json::array({r->start_hours(), r->end_hours()}));
    else
      ranges.push_back(nullptr);
  }
  j["hour_ranges"] = ranges;
  return j;
}

inline json to_json(const RefinementPlan& plan) {
  json j;
  j["strategy"] = std::string(to_string(plan.strategy));
  j["k"] = plan.k;
  if (plan.beam_size) j["beam_size"] = *plan.beam_size;
  json steps = json::array();
  for (const auto& s : plan.steps) steps.push_back(to_json(s));
  j["steps"] = steps;
  j["stopped_early"] = plan.stopped_early;
  j["total_bits_start"] = plan.total_bits_start;
  j["total_bits_final"] = plan.total_bits_final;
  j["cumulative_information_gain"] = plan.cumulative_gain();
  return j;
}

inline json header() {
  return json{{"schema_version", kReportSchemaVersion},
              {"generator", json{{"name", "timesplit"}, {"version", std::string(kToolVersion)}}}};
}

/// Reconstructs an applicable plan (labels, relabelings, assignments) from a
/// serialized report plan.
inline RefinementPlan plan_from_json(const json& j) {
  RefinementPlan plan;
  std::string strategy = j.at("strategy").get<std::string>();
  if (strategy == "all-at-once") plan.strategy = Strategy::AllAtOnce;
  else if (strategy == "greedy") plan.strategy = Strategy::Greedy;
  else if (strategy == "beam") plan.strategy = Strategy::Beam;
  else if (strategy == "exhaustive") plan.strategy = Strategy::Exhaustive;
  else throw ParseError("plan: unknown strategy '" + strategy + "'");
  plan.k = j.at("k").get<size_t>();
  if (j.contains("beam_size")) plan.beam_size = j.at("beam_size").get<size_t>();
  plan.stopped_early = j.value("stopped_early", false);
  plan.total_bits_start = j.value("total_bits_start", 0.0);
  plan.total_bits_final = j.value("total_bits_final", 0.0);
  for (const auto& sj : j.at("steps")) {
    PlanStep step;
    step.label = sj.at("label").get<std::string>();
    step.relabeling.covered_label = step.label;
    step.relabeling.refined = sj.at("refined_labels").get<std::vector<std::string>>();
    for (const auto& [id, cluster] : sj.at("assignment").items())
      step.assignment[id] = cluster.get<int>();
    step.gain = sj.value("information_gain", 0.0);
    step.bits_before = sj.value("bits_before", 0.0);
    step.bits_after = sj.value("bits_after", 0.0);
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

} // namespace report

} // namespace timesplit

#endif // TIMESPLIT_REPORT_HPP
