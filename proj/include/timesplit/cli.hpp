#ifndef TIMESPLIT_CLI_HPP
#define TIMESPLIT_CLI_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "timesplit/csv.hpp"
#include "timesplit/report.hpp"
#include "timesplit/search.hpp"
#include "timesplit/synth_spec.hpp"
#include "timesplit/xes.hpp"

namespace timesplit::cli {

// Exit codes: 0 success, 2 input or validation error, 3 resource cap exceeded.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCap = 3;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline bool has_extension(const std::string& path, std::string_view ext) {
  if (path.size() < ext.size()) return false;
  std::string tail = path.substr(path.size() - ext.size());
  for (auto& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return tail == ext;
}

} // namespace detail

/// Input and partitioning flags shared by the reading subcommands.
struct IoOptions {
  std::string input;
  std::string format; // "", "csv", "xes"
  std::string col_id;
  std::string col_timestamp = "timestamp";
  std::string col_label = "label";
  std::vector<std::string> attribute_columns;
  std::string timestamp_format{kDefaultTimestampFormat};
  std::vector<std::string> partition_keys;
  bool no_day = false;
  std::string day_boundary = "00:00:00";

  bool is_xes() const {
    if (format == "xes") return true;
    if (format == "csv") return false;
    return detail::has_extension(input, ".xes");
  }
};

/// Loads and partitions the input. XES files come with their own traces; CSV
/// files are partitioned by the key/day flags.
inline EventLog load_log(const IoOptions& io) {
  std::string text = detail::read_file(io.input);
  if (io.is_xes()) return parse_xes(text);
  CsvColumns columns;
  if (!io.col_id.empty()) columns.id = io.col_id;
  columns.timestamp = io.col_timestamp;
  columns.label = io.col_label;
  if (!io.attribute_columns.empty()) columns.attributes = io.attribute_columns;
  auto events = parse_csv(text, columns, io.timestamp_format);
  PartitionSpec spec;
  spec.key_attributes = io.partition_keys;
  spec.granularity =
      io.no_day ? PartitionSpec::Granularity::None : PartitionSpec::Granularity::Day;
  spec.day_boundary_sec = parse_time_of_day(io.day_boundary);
  return partition(events, spec);
}

inline void write_log(const EventLog& log, const std::string& path, bool as_xes,
                      std::string_view timestamp_format) {
  detail::write_file(path, as_xes ? write_xes(log) : write_csv(log, timestamp_format));
}

namespace detail {

inline void add_io_options(CLI::App* cmd, IoOptions& io) {
  cmd->add_option("input", io.input, "input log file (.csv or .xes)")->required();
  cmd->add_option("--format", io.format, "input format override: csv or xes")
      ->check(CLI::IsMember({"csv", "xes"}));
  cmd->add_option("--col-id", io.col_id, "CSV column holding event ids");
  cmd->add_option("--col-timestamp", io.col_timestamp, "CSV timestamp column");
  cmd->add_option("--col-label", io.col_label, "CSV label column");
  cmd->add_option("--col-attr", io.attribute_columns,
                  "CSV attribute columns (default: all remaining)");
  cmd->add_option("--timestamp-format", io.timestamp_format,
                  "timestamp format (%Y %m %d %H %M %S directives)");
  cmd->add_option("--key", io.partition_keys, "partition key attribute (repeatable)");
  cmd->add_flag("--no-day", io.no_day, "partition by key attributes only");
  cmd->add_option("--day-boundary", io.day_boundary, "time of day starting a case (HH:MM[:SS])");
}

inline uint64_t default_seed() {
  if (const char* env = std::getenv("TIMESPLIT_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
  }
  return 1;
}

inline void add_pipeline_options(CLI::App* cmd, PipelineConfig& config,
                                 std::string& watson_gate, std::string& verdict_mode) {
  cmd->add_option("--alpha", config.alpha, "significance level for every test");
  cmd->add_option("--seed", config.seed, "random seed (env TIMESPLIT_SEED overrides default)");
  cmd->add_option("--max-components", config.max_components, "largest mixture size to try");
  cmd->add_option("--delta-bic", config.delta_bic, "required BIC decrease per extra component");
  cmd->add_option("--rao-mc", config.rao_mc_samples, "Monte Carlo samples for the spacing test");
  cmd->add_option("--dip-bootstrap", config.dip_bootstrap_samples,
                  "bootstrap samples for the dip test");
  cmd->add_option("--watson-gate", watson_gate,
                  "cluster fit gate: exceeds-critical, not-rejected, bootstrap, off")
      ->check(CLI::IsMember({"exceeds-critical", "not-rejected", "bootstrap", "off"}));
  cmd->add_option("--verdict", verdict_mode,
                  "control-flow verdict mode: significance, ig, both")
      ->check(CLI::IsMember({"significance", "ig", "both"}));
  cmd->add_flag("--no-end-token", "exclude trace ends from the follows statistics");
  cmd->add_option("--min-cluster", config.min_cluster_size,
                  "smallest acceptable cluster size");
  cmd->add_option("--exhaustive-cap", config.exhaustive_cap,
                  "largest refinable-label count the exhaustive strategy accepts");
}

inline void finish_pipeline_options(const CLI::App* cmd, PipelineConfig& config,
                                    const std::string& watson_gate,
                                    const std::string& verdict_mode) {
  if (cmd->count("--no-end-token")) config.with_end_token = false;
  if (watson_gate == "exceeds-critical") config.watson_gate = WatsonGate::ExceedsFittedCritical;
  else if (watson_gate == "not-rejected") config.watson_gate = WatsonGate::NotRejected;
  else if (watson_gate == "bootstrap") config.watson_gate = WatsonGate::BootstrapNotRejected;
  else if (watson_gate == "off") config.watson_gate = WatsonGate::Disabled;
  if (verdict_mode == "significance") config.verdict_mode = VerdictMode::Significance;
  else if (verdict_mode == "ig") config.verdict_mode = VerdictMode::IgPositive;
  else if (verdict_mode == "both") config.verdict_mode = VerdictMode::Both;
}

inline nlohmann::json config_json(const PipelineConfig& config) {
  const char* gate = "exceeds-critical";
  switch (config.watson_gate) {
    case WatsonGate::ExceedsFittedCritical: gate = "exceeds-critical"; break;
    case WatsonGate::NotRejected: gate = "not-rejected"; break;
    case WatsonGate::BootstrapNotRejected: gate = "bootstrap"; break;
    case WatsonGate::Disabled: gate = "off"; break;
  }
  const char* verdict = "significance";
  switch (config.verdict_mode) {
    case VerdictMode::Significance: verdict = "significance"; break;
    case VerdictMode::IgPositive: verdict = "ig"; break;
    case VerdictMode::Both: verdict = "both"; break;
  }
  return nlohmann::json{{"alpha", config.alpha},
                        {"max_components", config.max_components},
                        {"delta_bic", config.delta_bic},
                        {"seed", config.seed},
                        {"rao_mc_samples", config.rao_mc_samples},
                        {"dip_bootstrap_samples", config.dip_bootstrap_samples},
                        {"watson_gate", gate},
                        {"verdict_mode", verdict},
                        {"with_end_token", config.with_end_token},
                        {"stop_on_ig", config.stop_on_ig},
                        {"exhaustive_cap", config.exhaustive_cap},
                        {"min_cluster_size", config.min_cluster_size}};
}

inline void print_candidate_summary(std::ostream& os, const RefinementCandidate& cand) {
  os << "label \"" << cand.label << "\": n=" << cand.sample_size << "\n";
  if (cand.rao) {
    os << "  rao:     U=" << cand.rao->statistic_degrees() << " deg  p=" << *cand.rao->p_value
       << (cand.rao->reject ? "  reject uniformity" : "  uniform") << "\n";
  }
  if (cand.dip) {
    os << "  dip:     D=" << cand.dip->statistic << "  p=" << *cand.dip->p_value
       << (cand.dip->reject ? "  reject unimodality" : "  unimodal") << "\n";
  }
  if (cand.selection) {
    os << "  bic:     ";
    for (const auto& entry : cand.selection->candidates)
      os << "m=" << entry.m << ":" << entry.bic << " ";
    os << " chosen m=" << cand.selection->chosen << "\n";
  }
  if (cand.model) {
    for (size_t j = 0; j < cand.model->size(); ++j) {
      const auto& c = cand.model->components[j];
      os << "  comp " << j + 1 << ":  weight=" << c.weight << "  mean=" << c.mean
         << " rad (" << radians_to_hours(c.mean) << " h)  kappa=" << c.kappa << "\n";
    }
  }
  if (cand.assignment) {
    for (size_t j = 0; j < cand.assignment->m; ++j) {
      os << "  cluster " << j + 1 << ": n=" << cand.assignment->counts[j];
      if (cand.assignment->ranges[j])
        os << "  hours [" << cand.assignment->ranges[j]->start_hours() << ", "
           << cand.assignment->ranges[j]->end_hours() << "]";
      if (j < cand.watson.size())
        os << "  watson=" << cand.watson[j].statistic << " (gate " << cand.watson_gate_critical
           << ")";
      os << "\n";
    }
  }
  if (cand.verdict) {
    os << "  control: ig=" << cand.verdict->information_gain
       << "  significant=" << cand.verdict->significant_count() << "/"
       << cand.verdict->significant_activities.size() << "\n";
  }
  os << "  => " << to_string(cand.stage) << "\n";
}

} // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"time-of-day label refinement for event logs"};
  app.require_subcommand(1);

  // --- analyze ---
  IoOptions an_io;
  PipelineConfig an_config;
  an_config.seed = detail::default_seed();
  std::string an_gate = "exceeds-critical", an_verdict = "significance";
  std::string an_label, an_report;
  auto* analyze = app.add_subcommand("analyze", "run the refinement pipeline, report only");
  detail::add_io_options(analyze, an_io);
  detail::add_pipeline_options(analyze, an_config, an_gate, an_verdict);
  analyze->add_option("--label", an_label, "restrict the analysis to one label");
  analyze->add_option("--report", an_report, "write the JSON report to this path");

  // --- refine ---
  IoOptions re_io;
  PipelineConfig re_config;
  re_config.seed = detail::default_seed();
  std::string re_gate = "exceeds-critical", re_verdict = "significance";
  std::string re_strategy = "greedy", re_out, re_report;
  size_t re_k = 1, re_beam = 4;
  auto* refine = app.add_subcommand("refine", "select and apply label refinements");
  detail::add_io_options(refine, re_io);
  detail::add_pipeline_options(refine, re_config, re_gate, re_verdict);
  refine->add_option("--strategy", re_strategy, "all-at-once, greedy, beam or exhaustive")
      ->check(CLI::IsMember({"all-at-once", "greedy", "beam", "exhaustive"}));
  refine->add_option("--k", re_k, "number of refinements to apply");
  refine->add_option("--beam-size", re_beam, "beam width for --strategy beam");
  refine->add_flag("--stop-on-ig", re_config.stop_on_ig,
                   "stop when the next refinement's information gain is not positive");
  refine->add_option("--out", re_out, "path of the refined log")->required();
  refine->add_option("--report", re_report, "write the JSON report to this path");

  // --- synth ---
  std::string sy_spec, sy_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic log from a JSON spec");
  synth->add_option("spec", sy_spec, "spec file (JSON)")->required();
  synth->add_option("--out", sy_out, "output log path")->required();

  // --- density ---
  IoOptions de_io;
  std::string de_label, de_out;
  size_t de_max_components = 8;
  double de_delta_bic = 10.0;
  uint64_t de_seed = detail::default_seed();
  auto* density = app.add_subcommand("density", "per-label histogram and fitted density");
  detail::add_io_options(density, de_io);
  density->add_option("--label", de_label, "label to profile")->required();
  density->add_option("--out", de_out, "output CSV path (default: stdout)");
  density->add_option("--max-components", de_max_components, "largest mixture size to try");
  density->add_option("--delta-bic", de_delta_bic, "required BIC decrease per extra component");
  density->add_option("--seed", de_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (analyze->parsed()) {
      detail::finish_pipeline_options(analyze, an_config, an_gate, an_verdict);
      EventLog log = load_log(an_io);
      std::vector<RefinementCandidate> candidates;
      if (!an_label.empty()) {
        if (!log.has_label(an_label))
          throw ValidationError("label '" + an_label + "' does not occur in the log");
        auto cand = analyze_label(log, an_label, an_config);
        evaluate_control_flow(log, cand, an_config);
        candidates.push_back(std::move(cand));
      } else {
        candidates = generate_candidates(log, an_config);
      }
      for (const auto& cand : candidates) detail::print_candidate_summary(std::cout, cand);
      if (!an_report.empty()) {
        nlohmann::json j = report::header();
        j["config"] = detail::config_json(an_config);
        j["input"] = nlohmann::json{{"path", an_io.input},
                                    {"events", log.event_count()},
                                    {"traces", log.traces().size()},
                                    {"labels", log.label_alphabet()}};
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& cand : candidates) cands.push_back(report::to_json(cand));
        j["candidates"] = cands;
        detail::write_file(an_report, j.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (refine->parsed()) {
      detail::finish_pipeline_options(refine, re_config, re_gate, re_verdict);
      EventLog log = load_log(re_io);
      auto candidates = generate_candidates(log, re_config);
      RefinementPlan plan;
      if (re_strategy == "all-at-once")
        plan = strategy_all_at_once(log, candidates, re_k, re_config);
      else if (re_strategy == "greedy")
        plan = strategy_greedy(log, candidates, re_k, re_config);
      else if (re_strategy == "beam")
        plan = strategy_beam(log, candidates, re_k, re_beam, re_config);
      else
        plan = strategy_exhaustive(log, candidates, re_k, re_config);

      EventLog refined = apply_plan(log, plan);
      bool out_xes = detail::has_extension(re_out, ".xes") ||
                     (!detail::has_extension(re_out, ".csv") && re_io.is_xes());
      write_log(refined, re_out, out_xes, re_io.timestamp_format);

      std::cout << "strategy " << to_string(plan.strategy) << ": applied " << plan.steps.size()
                << " refinement(s)";
      for (const auto& step : plan.steps) std::cout << " [" << step.label << "]";
      std::cout << "\n  entropy " << plan.total_bits_start << " -> " << plan.total_bits_final
                << " bits, cumulative ig " << plan.cumulative_gain() << "\n";
      if (plan.stopped_early) std::cout << "  stopped early by the ig criterion\n";

      if (!re_report.empty()) {
        nlohmann::json j = report::header();
        j["config"] = detail::config_json(re_config);
        j["config"]["strategy"] = re_strategy;
        j["config"]["k"] = re_k;
        if (re_strategy == "beam") j["config"]["beam_size"] = re_beam;
        j["input"] = nlohmann::json{{"path", re_io.input},
                                    {"events", log.event_count()},
                                    {"traces", log.traces().size()},
                                    {"labels", log.label_alphabet()}};
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& cand : candidates) cands.push_back(report::to_json(cand));
        j["candidates"] = cands;
        j["plan"] = report::to_json(plan);
        j["entropy"] = nlohmann::json{{"before_bits", plan.total_bits_start},
                                      {"after_bits", plan.total_bits_final}};
        j["outputs"] = nlohmann::json{{"refined_log", re_out}};
        detail::write_file(re_report, j.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (synth->parsed()) {
      SyntheticSpec spec = parse_synth_spec(detail::read_file(sy_spec));
      EventLog log = generate(spec);
      bool out_xes = detail::has_extension(sy_out, ".xes");
      write_log(log, sy_out, out_xes, kDefaultTimestampFormat);
      std::cout << "generated " << log.event_count() << " events in " << log.traces().size()
                << " traces (seed " << spec.seed << ")\n";
      return kExitOk;
    }

    if (density->parsed()) {
      EventLog log = load_log(de_io);
      if (!log.has_label(de_label))
        throw ValidationError("label '" + de_label + "' does not occur in the log");
      auto ls = label_time_sample(log, de_label);
      auto selection = select_components(ls.sample, de_max_components, de_delta_bic,
                                         derive_seed(de_seed, de_label));
      const auto& model = selection.chosen_candidate().model;
      constexpr int kBins = 288; // five-minute bins
      std::vector<int> counts(kBins, 0);
      for (double a : ls.sample.angles()) {
        int bin = static_cast<int>(radians_to_hours(a) * (kBins / 24.0));
        counts[std::min(bin, kBins - 1)]++;
      }
      std::string out = "hour,count,density\n";
      for (int b = 0; b < kBins; ++b) {
        double hour = 24.0 * b / kBins;
        double center = hours_to_radians(hour + 12.0 / kBins);
        char line[96];
        std::snprintf(line, sizeof(line), "%.6f,%d,%.9f\n", hour, counts[b],
                      model.pdf(center));
        out += line;
      }
      if (de_out.empty())
        std::cout << out;
      else
        detail::write_file(de_out, out);
      return kExitOk;
    }
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("timesplit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace timesplit::cli

#endif // TIMESPLIT_CLI_HPP
